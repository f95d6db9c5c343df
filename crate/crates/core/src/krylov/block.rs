use nalgebra::DVector;
use rand::Rng;

use super::{ritz_from_images, unit_or_collapse, KrylovSubspace};
use crate::error::{Error, Result};
use crate::linalg::{OrthoBasis, RANK_TOL};
use crate::operators::CountingOracle;
use crate::rng::gaussian_vector;

/// Chain vectors and their images.
type Chain = (Vec<DVector<f64>>, Vec<DVector<f64>>);

/// One chain `{g, Ag, …, A^r g}` kept well conditioned by orthonormalizing
/// within the chain. Returns the chain vectors and the images `A·xₜ` for
/// `t < r` (the image of the last vector is not computed).
fn chain(oracle: &mut CountingOracle<'_>, g: &DVector<f64>, r: usize) -> Result<Chain> {
    let mut local = OrthoBasis::new(g.len());
    let mut xs = vec![unit_or_collapse(g)?];
    local.push_orthonormal(xs[0].clone());
    let mut images = Vec::with_capacity(r);
    for _ in 0..r {
        let x = xs.last().expect("chain is never empty");
        let y = oracle.apply(x)?;
        images.push(y.clone());
        let next = match local.push(&y, RANK_TOL) {
            Some(q) => q,
            None => {
                let n = y.norm();
                if n > 0.0 {
                    &y / n
                } else {
                    y
                }
            }
        };
        xs.push(next);
    }
    Ok((xs, images))
}

fn check_symmetric(oracle: &CountingOracle<'_>) -> Result<()> {
    if !oracle.is_symmetric() || oracle.nrows() != oracle.ncols() {
        return Err(Error::InvalidOperator("block Krylov needs a symmetric operator".into()));
    }
    Ok(())
}

fn check_budget(oracle: &CountingOracle<'_>, needed: usize) -> Result<()> {
    if let Some(remaining) = oracle.remaining() {
        if remaining < needed {
            return Err(Error::BudgetExceeded { budget: oracle.budget().unwrap_or(0) });
        }
    }
    Ok(())
}

struct Chains {
    raw: Vec<DVector<f64>>,
    basis: OrthoBasis,
    /// `A·x` for every raw vector except the last of each chain.
    images: Vec<Option<DVector<f64>>>,
    start_queries: usize,
}

fn build_chains<R: Rng + ?Sized>(oracle: &mut CountingOracle<'_>, r: usize, s: usize, rng: &mut R) -> Result<Chains> {
    check_symmetric(oracle)?;
    if s == 0 {
        return Err(Error::config("block size s must be positive"));
    }
    check_budget(oracle, r * s)?;
    let n = oracle.ncols();
    if s * (r + 1) >= n {
        log::debug!("block Krylov with s(r+1) = {} >= n = {n}: span may saturate", s * (r + 1));
    }
    let start_queries = oracle.count();
    let starts: Vec<DVector<f64>> = (0..s).map(|_| gaussian_vector(rng, n)).collect();
    let mut raw = Vec::with_capacity(s * (r + 1));
    let mut images = Vec::with_capacity(s * (r + 1));
    for g in &starts {
        let (xs, ys) = chain(oracle, g, r)?;
        for (t, x) in xs.into_iter().enumerate() {
            raw.push(x);
            images.push(ys.get(t).cloned());
        }
    }
    let (basis, _) = crate::linalg::orthonormalize(n, &raw);
    if basis.is_empty() {
        return Err(Error::RankCollapse);
    }
    Ok(Chains { raw, basis, images, start_queries })
}

/// Block Krylov subspace `span{A^t gⱼ : 0 ≤ t ≤ r, 1 ≤ j ≤ s}` with exactly
/// `r·s` matvecs.
pub fn block_krylov<R: Rng + ?Sized>(
    oracle: &mut CountingOracle<'_>,
    r: usize,
    s: usize,
    rng: &mut R,
) -> Result<KrylovSubspace> {
    let chains = build_chains(oracle, r, s, rng)?;
    let used = oracle.count() - chains.start_queries;
    Ok(KrylovSubspace::new(chains.raw, chains.basis, s, r, used))
}

#[derive(Clone, Debug)]
pub struct BlockRitz {
    pub v: DVector<f64>,
    pub subspace: KrylovSubspace,
    /// Top Ritz value of `QᵀA²Q`.
    pub ritz_value: f64,
}

/// Block Krylov followed by Rayleigh–Ritz on `QᵀA²Q`. The images of the last
/// vector of each chain cost `s` extra matvecs, so the total is `r·s + s`.
pub fn block_krylov_rayleigh_ritz<R: Rng + ?Sized>(
    oracle: &mut CountingOracle<'_>,
    r: usize,
    s: usize,
    rng: &mut R,
) -> Result<BlockRitz> {
    check_budget(oracle, r * s + s)?;
    let Chains { raw, images, start_queries, .. } = build_chains(oracle, r, s, rng)?;
    let mut full_images = Vec::with_capacity(raw.len());
    for (x, y) in raw.iter().zip(images) {
        let y = match y {
            Some(y) => y,
            None => oracle.apply(x)?,
        };
        full_images.push(y);
    }
    // Orthonormalize the raw vectors and carry the same combinations through
    // their images, so A·Q is known without further matvecs.
    let n = oracle.ncols();
    let max_norm = raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis = OrthoBasis::new(n);
    let mut basis_images: Vec<DVector<f64>> = Vec::new();
    for (x, ax) in raw.iter().zip(&full_images) {
        let mut rx = x.clone();
        let mut rax = ax.clone();
        for _ in 0..2 {
            let coeffs: Vec<f64> = basis.columns().iter().map(|q| q.dot(&rx)).collect();
            for ((q, aq), c) in basis.columns().iter().zip(&basis_images).zip(coeffs) {
                rx.axpy(-c, q, 1.0);
                rax.axpy(-c, aq, 1.0);
            }
        }
        let norm = rx.norm();
        // A looser cut than the span tolerance: the images are amplified by 1/norm.
        if norm > 1e-8 * max_norm {
            basis.push_orthonormal(rx / norm);
            basis_images.push(rax / norm);
        }
    }
    if basis.is_empty() {
        return Err(Error::RankCollapse);
    }
    let (ritz_value, v) = ritz_from_images(&basis, &basis_images);
    let used = oracle.count() - start_queries;
    Ok(BlockRitz { v, subspace: KrylovSubspace::new(raw, basis, s, r, used), ritz_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::best_correlation;
    use crate::linalg::top_eigenpair;
    use crate::operators::SymmetricOperator;
    use crate::rng::{gaussian_matrix, stream, Purpose};
    use nalgebra::DMatrix;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let m = gaussian_matrix(&mut stream(seed, 0, Purpose::Instance), n, n);
        (&m + m.transpose()) * 0.5
    }

    #[test]
    fn counts_and_ranks() {
        let a = SymmetricOperator::dense(random_symmetric(20, 1)).unwrap();
        let mut o = CountingOracle::new(&a);
        let s = block_krylov(&mut o, 1, 1, &mut stream(1, 0, Purpose::StartVector)).unwrap();
        assert_eq!(o.count(), 1);
        assert_eq!(s.raw_len(), 2);
        assert_eq!(s.rank(), 2);

        let mut o = CountingOracle::new(&a);
        let s = block_krylov(&mut o, 2, 3, &mut stream(1, 1, Purpose::StartVector)).unwrap();
        assert_eq!(o.count(), 6);
        assert_eq!(s.queries_used(), 6);
        assert_eq!(s.raw_len(), 9);
        assert_eq!(s.rank(), 9);
        assert_eq!(s.block_size(), 3);
    }

    #[test]
    fn saturated_span_gives_exact_optimum() {
        let m = random_symmetric(8, 2);
        let a = SymmetricOperator::dense(m.clone()).unwrap();
        let mut o = CountingOracle::new(&a);
        let s = block_krylov(&mut o, 7, 1, &mut stream(2, 0, Purpose::StartVector)).unwrap();
        assert_eq!(s.rank(), 8);
        let eig = m.clone().symmetric_eigen();
        let idx = eig.eigenvalues.iamax();
        let u = eig.eigenvectors.column(idx).into_owned();
        assert!((best_correlation(&s, &u).unwrap() - 1.0).abs() < 1e-10);

        let mut o = CountingOracle::new(&a);
        let ritz = block_krylov_rayleigh_ritz(&mut o, 7, 1, &mut stream(2, 0, Purpose::StartVector)).unwrap();
        assert_eq!(o.count(), 8);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let v = &ritz.v;
        let residual = &m - (&m * v) * v.transpose();
        let err = residual.singular_values().max();
        assert!((err - sv[1]).abs() < 1e-8, "{err} vs {}", sv[1]);
    }

    #[test]
    fn ritz_is_optimal_within_span() {
        let m = random_symmetric(30, 3);
        let a = SymmetricOperator::dense(m.clone()).unwrap();
        let mut o = CountingOracle::new(&a);
        let ritz = block_krylov_rayleigh_ritz(&mut o, 2, 2, &mut stream(3, 0, Purpose::StartVector)).unwrap();
        assert_eq!(o.count(), 6);
        let q = ritz.subspace.q();
        let aq = &m * &q;
        let (top, _) = top_eigenpair(&aq.tr_mul(&aq));
        assert!((ritz.ritz_value - top).abs() <= 1e-8 * top);
        let av = &m * &ritz.v;
        assert!((av.norm_squared() - top).abs() <= 1e-8 * top);
    }

    #[test]
    fn budget_checked_before_any_query() {
        let a = SymmetricOperator::dense(random_symmetric(10, 4)).unwrap();
        let mut o = CountingOracle::with_budget(&a, 5);
        assert!(block_krylov(&mut o, 2, 3, &mut stream(4, 0, Purpose::StartVector)).is_err());
        assert_eq!(o.count(), 0);
    }
}
