//! Concrete LMO and projection oracles: the rank-1 spectrahedron LMO backed
//! by Lanczos, a scaled-simplex vertex oracle for vector domains, and the
//! projection operators the built-in constraint sets need.

pub mod lanczos;

pub use lanczos::{lanczos_min_eigpair, EigPairEstimate, LanczosConfig};

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::problem::{CompactDomain, ConstraintSet, DomainKind};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle received or produced non-finite values")]
    NonFinite,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("invalid oracle configuration: {0}")]
    BadConfig(&'static str),
    #[error("tridiagonal eigensolver did not converge")]
    EigenFailure,
}

impl From<linalg::LinalgError> for OracleError {
    fn from(_: linalg::LinalgError) -> Self {
        OracleError::EigenFailure
    }
}

/// Extreme point returned by a linear minimization oracle, kept in its
/// sparse form and materialized lazily.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    /// The zero point (optimal for trace-bounded domains when the direction
    /// is positive semidefinite).
    Zero { dim: usize },
    /// weight · v vᵀ in a matrix ambient space; `vector` has unit norm.
    Rank1 { weight: f64, vector: Vec<f64> },
    /// weight · e_index in a vector ambient space.
    Vertex {
        weight: f64,
        index: usize,
        dim: usize,
    },
}

impl Atom {
    pub fn weight(&self) -> f64 {
        match self {
            Atom::Zero { .. } => 0.0,
            Atom::Rank1 { weight, .. } => *weight,
            Atom::Vertex { weight, .. } => *weight,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Atom::Zero { dim } => *dim,
            Atom::Rank1 { vector, .. } => vector.len() * vector.len(),
            Atom::Vertex { dim, .. } => *dim,
        }
    }

    /// out += coeff · atom
    pub fn add_scaled_into(&self, out: &mut [f64], coeff: f64) {
        debug_assert_eq!(out.len(), self.ambient_dim());
        match self {
            Atom::Zero { .. } => {}
            Atom::Rank1 { weight, vector } => {
                linalg::rank1_update(out, vector.len(), coeff * weight, vector);
            }
            Atom::Vertex { weight, index, .. } => {
                out[*index] += coeff * weight;
            }
        }
    }

    pub fn materialize_into(&self, out: &mut [f64]) {
        out.fill(0.0);
        self.add_scaled_into(out, 1.0);
    }

    pub fn materialize(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim()];
        self.add_scaled_into(&mut out, 1.0);
        out
    }
}

/// LMO result: the atom plus the eigensolver diagnostics. `converged` is
/// false when Lanczos returned its best Ritz pair without reaching the
/// requested residual tolerance.
#[derive(Debug, Clone)]
pub struct LmoOutcome {
    pub atom: Atom,
    pub eig_residual: f64,
    pub converged: bool,
}

/// Trace constraint flavor of the spectrahedron domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Equality,
    AtMost,
}

/// Rank-1 LMO over {x ⪰ 0, tr x = β} (equality) or {x ⪰ 0, tr x ≤ α}
/// (at-most). The minimizer of ⟨x, v⟩ is β·uuᵀ for a minimum eigenvector u
/// of v; in at-most mode the zero matrix wins when v has no negative
/// eigenvalue.
pub fn lmo_spectrahedron(
    direction: &[f64],
    n: usize,
    trace_bound: f64,
    mode: TraceMode,
    cfg: &LanczosConfig,
) -> Result<LmoOutcome, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroDimension);
    }
    if !(trace_bound > 0.0) {
        return Err(OracleError::BadConfig("trace bound must be positive"));
    }
    debug_assert_eq!(direction.len(), n * n);
    if !linalg::all_finite(direction) {
        return Err(OracleError::NonFinite);
    }
    let pair = lanczos_min_eigpair(
        |x: &[f64], out: &mut [f64]| linalg::sym_matvec(direction, n, x, out),
        n,
        cfg,
    )?;
    let scale = linalg::norm(direction);
    let atom = match mode {
        TraceMode::Equality => Atom::Rank1 {
            weight: trace_bound,
            vector: pair.vector,
        },
        TraceMode::AtMost => {
            // Deterministic tie-break at the PSD boundary: the zero matrix
            // is always feasible.
            if pair.value < -1e-12 * scale {
                Atom::Rank1 {
                    weight: trace_bound,
                    vector: pair.vector,
                }
            } else {
                Atom::Zero { dim: n * n }
            }
        }
    };
    Ok(LmoOutcome {
        atom,
        eig_residual: pair.residual,
        converged: pair.converged,
    })
}

/// {x ⪰ 0, tr x = β} or {x ⪰ 0, tr x ≤ α} in flat row-major storage.
#[derive(Debug, Clone)]
pub struct Spectrahedron {
    pub n: usize,
    pub bound: f64,
    pub mode: TraceMode,
}

impl Spectrahedron {
    pub fn equality(n: usize, beta: f64) -> Self {
        Spectrahedron {
            n,
            bound: beta,
            mode: TraceMode::Equality,
        }
    }

    pub fn at_most(n: usize, alpha: f64) -> Self {
        Spectrahedron {
            n,
            bound: alpha,
            mode: TraceMode::AtMost,
        }
    }
}

impl CompactDomain for Spectrahedron {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn lmo(&self, direction: &[f64], cfg: &LanczosConfig) -> Result<LmoOutcome, OracleError> {
        lmo_spectrahedron(direction, self.n, self.bound, self.mode, cfg)
    }

    fn diameter(&self) -> f64 {
        // Distance between orthogonal extreme points β·uuᵀ and β·wwᵀ; the
        // at-most domain attains the same value against the origin corner.
        self.bound * core::f64::consts::SQRT_2
    }

    fn membership_residual(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n * self.n);
        let mut defect = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                defect = defect.max((x[i * self.n + j] - x[j * self.n + i]).abs());
            }
        }
        let tr = linalg::trace(x, self.n);
        defect = defect.max(match self.mode {
            TraceMode::Equality => (tr - self.bound).abs(),
            TraceMode::AtMost => (tr - self.bound).max(-tr).max(0.0),
        });
        let cfg = LanczosConfig {
            max_iterations: self.n.min(96),
            tolerance: 1e-12 * (1.0 + linalg::norm(x)),
            rng_seed: 0xd0,
            restarts: 1,
        };
        if let Ok(pair) = lanczos_min_eigpair(
            |v: &[f64], out: &mut [f64]| linalg::sym_matvec(x, self.n, v, out),
            self.n,
            &cfg,
        ) {
            defect = defect.max(-pair.value);
        }
        defect.max(0.0)
    }

    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // Gaussian PSD sample G Gᵀ rescaled onto the trace constraint.
        let n = self.n;
        let g = sampling::gaussian_vec(rng, n * n);
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += g[i * n + k] * g[j * n + k];
                }
                s[i * n + j] = acc;
                s[j * n + i] = acc;
            }
        }
        let tr = linalg::trace(&s, n);
        let target = match self.mode {
            TraceMode::Equality => self.bound,
            TraceMode::AtMost => self.bound * rng.gen::<f64>(),
        };
        if tr > 1e-300 {
            linalg::scale(&mut s, target / tr);
        }
        s
    }

    fn kind(&self) -> DomainKind {
        match self.mode {
            TraceMode::Equality => DomainKind::SpectrahedronEq {
                n: self.n,
                beta: self.bound,
            },
            TraceMode::AtMost => DomainKind::SpectrahedronLe {
                n: self.n,
                alpha: self.bound,
            },
        }
    }
}

/// {x ≥ 0, Σ x_i = radius}: vector-ambient domain whose LMO picks the
/// cheapest vertex. Used by the composite toy instances.
#[derive(Debug, Clone)]
pub struct ScaledSimplex {
    pub dim: usize,
    pub radius: f64,
}

impl CompactDomain for ScaledSimplex {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lmo(&self, direction: &[f64], _cfg: &LanczosConfig) -> Result<LmoOutcome, OracleError> {
        debug_assert_eq!(direction.len(), self.dim);
        if !linalg::all_finite(direction) {
            return Err(OracleError::NonFinite);
        }
        let mut best = 0usize;
        for (i, v) in direction.iter().enumerate() {
            if *v < direction[best] {
                best = i;
            }
        }
        Ok(LmoOutcome {
            atom: Atom::Vertex {
                weight: self.radius,
                index: best,
                dim: self.dim,
            },
            eig_residual: 0.0,
            converged: true,
        })
    }

    fn diameter(&self) -> f64 {
        self.radius * core::f64::consts::SQRT_2
    }

    fn membership_residual(&self, x: &[f64]) -> f64 {
        let sum: f64 = x.iter().sum();
        let neg = x.iter().fold(0.0f64, |acc, v| acc.max(-v));
        (sum - self.radius).abs().max(neg)
    }

    fn sample_feasible(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.dim)
            .map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln())
            .collect();
        let sum: f64 = v.iter().sum();
        linalg::scale(&mut v, self.radius / sum);
        v
    }

    fn kind(&self) -> DomainKind {
        DomainKind::Simplex {
            dim: self.dim,
            radius: self.radius,
        }
    }
}

/// The singleton {b}: projection is constant.
#[derive(Debug, Clone)]
pub struct SingletonSet {
    pub target: Vec<f64>,
}

impl ConstraintSet for SingletonSet {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn project_into(&self, _z: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.target);
    }

    fn distance(&self, z: &[f64]) -> f64 {
        linalg::dist(z, &self.target)
    }
}

/// The nonnegative orthant, entrywise max(z, 0).
#[derive(Debug, Clone)]
pub struct NonnegOrthant {
    pub dim: usize,
}

impl ConstraintSet for NonnegOrthant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project_into(&self, z: &[f64], out: &mut [f64]) {
        for (o, zi) in out.iter_mut().zip(z) {
            *o = zi.max(0.0);
        }
    }

    fn distance(&self, z: &[f64]) -> f64 {
        z.iter()
            .map(|zi| {
                let neg = zi.min(0.0);
                neg * neg
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Cartesian product of constraint sets, projected blockwise; the squared
/// distance is the sum of blockwise squared distances.
pub struct ProductSet {
    blocks: Vec<Box<dyn ConstraintSet + Send + Sync>>,
    dim: usize,
}

impl ProductSet {
    pub fn new(blocks: Vec<Box<dyn ConstraintSet + Send + Sync>>) -> Self {
        let dim = blocks.iter().map(|b| b.dim()).sum();
        ProductSet { blocks, dim }
    }
}

impl ConstraintSet for ProductSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project_into(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim);
        let mut offset = 0;
        for block in &self.blocks {
            let d = block.dim();
            block.project_into(&z[offset..offset + d], &mut out[offset..offset + d]);
            offset += d;
        }
    }

    fn distance(&self, z: &[f64]) -> f64 {
        let mut offset = 0;
        let mut acc = 0.0;
        for block in &self.blocks {
            let d = block.dim();
            let bd = block.distance(&z[offset..offset + d]);
            acc += bd * bd;
            offset += d;
        }
        acc.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::atom_value_against;

    fn accurate_cfg(seed: u64) -> LanczosConfig {
        LanczosConfig {
            max_iterations: 256,
            tolerance: 1e-11,
            rng_seed: seed,
            restarts: 3,
        }
    }

    #[test]
    fn lmo_picks_negative_eigendirection() {
        let v = vec![1.0, 0.0, 0.0, -1.0]; // diag(1, -1)
        let out = lmo_spectrahedron(&v, 2, 1.0, TraceMode::Equality, &accurate_cfg(1)).unwrap();
        match &out.atom {
            Atom::Rank1 { weight, vector } => {
                assert!((weight - 1.0).abs() < 1e-15);
                assert!(vector[1].abs() > 1.0 - 1e-9);
                // sign fix: largest-magnitude entry positive
                assert!(vector[1] > 0.0);
            }
            other => panic!("unexpected atom {other:?}"),
        }
        assert!((atom_value_against(&out.atom, &v) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn lmo_at_most_returns_zero_on_psd_direction() {
        let v = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let out = lmo_spectrahedron(&v, 3, 5.0, TraceMode::AtMost, &accurate_cfg(2)).unwrap();
        assert_eq!(out.atom, Atom::Zero { dim: 9 });
        let eq = lmo_spectrahedron(&v, 3, 5.0, TraceMode::Equality, &accurate_cfg(3)).unwrap();
        assert!((eq.atom.weight() - 5.0).abs() < 1e-15);
        assert!((atom_value_against(&eq.atom, &v) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn lmo_matches_dense_eigensolver() {
        let n = 20;
        let mut rng = sampling::rng_from_seed(99);
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let val = sampling::standard_normal(&mut rng);
                v[i * n + j] = val;
                v[j * n + i] = val;
            }
        }
        let out = lmo_spectrahedron(&v, n, 7.0, TraceMode::Equality, &accurate_cfg(5)).unwrap();
        let dense = nalgebra::DMatrix::from_row_slice(n, n, &v);
        let lambda_min = dense
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let value = atom_value_against(&out.atom, &v);
        assert!(
            (value - 7.0 * lambda_min).abs() < 1e-7,
            "lmo value {value} vs dense {}",
            7.0 * lambda_min
        );
    }

    #[test]
    fn lmo_rejects_non_finite_direction() {
        let v = vec![f64::NAN; 4];
        let err = lmo_spectrahedron(&v, 2, 1.0, TraceMode::Equality, &accurate_cfg(1));
        assert_eq!(err.unwrap_err(), OracleError::NonFinite);
    }

    #[test]
    fn atom_materialization_traces_weight() {
        let atom = Atom::Rank1 {
            weight: 3.0,
            vector: vec![3f64.sqrt().recip(); 3],
        };
        let dense = atom.materialize();
        assert!((linalg::trace(&dense, 3) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_projection_examples() {
        let set = SingletonSet {
            target: vec![1.0, 1.0],
        };
        assert_eq!(set.project(&[3.0, -2.0]), vec![1.0, 1.0]);
        assert!((set.distance(&[3.0, -2.0]) - 8f64.sqrt()).abs() < 1e-15);
        assert!((set.distance(&[1.0, 1.0])).abs() < 1e-15);
        let ones = SingletonSet {
            target: vec![1.0; 4],
        };
        assert!((ones.distance(&[0.0; 4]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonneg_projection_examples() {
        let set = NonnegOrthant { dim: 3 };
        assert_eq!(set.project(&[-1.0, 2.0, 0.0]), vec![0.0, 2.0, 0.0]);
        let z = [-1.0, -2.0, -2.0];
        assert_eq!(set.project(&z), vec![0.0; 3]);
        assert!((set.distance(&z) - 3.0).abs() < 1e-15);
        assert!((set.distance(&[0.5, 1.0, 0.0])).abs() < 1e-15);
    }

    #[test]
    fn product_projection_examples() {
        let set = ProductSet::new(vec![
            Box::new(SingletonSet {
                target: vec![1.0, 1.0],
            }),
            Box::new(NonnegOrthant { dim: 4 }),
        ]);
        let z = [2.0, 0.0, -1.0, 3.0, 0.5, -2.0];
        let proj = set.project(&z);
        assert_eq!(proj, vec![1.0, 1.0, 0.0, 3.0, 0.5, 0.0]);
        // all-feasible input is unchanged
        let feasible = [1.0, 1.0, 0.2, 0.0, 1.0, 4.0];
        assert_eq!(set.project(&feasible), feasible.to_vec());
        assert!(set.distance(&feasible) < 1e-15);
        // one negative entry -d in the orthant block
        let one_neg = [1.0, 1.0, 0.0, 0.0, -0.75, 0.0];
        assert!((set.distance(&one_neg) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn projection_variational_inequality() {
        let set = ProductSet::new(vec![
            Box::new(SingletonSet {
                target: vec![1.0, -2.0],
            }),
            Box::new(NonnegOrthant { dim: 3 }),
        ]);
        let mut rng = sampling::rng_from_seed(17);
        for _ in 0..200 {
            let z = sampling::gaussian_vec(&mut rng, 5);
            let pz = set.project(&z);
            let w = set.project(&sampling::gaussian_vec(&mut rng, 5));
            let inner: f64 = (0..5).map(|i| (z[i] - pz[i]) * (w[i] - pz[i])).sum();
            assert!(inner <= 1e-12, "variational inequality violated: {inner}");
        }
    }

    #[test]
    fn lmo_beats_random_feasible_points() {
        let dom = Spectrahedron::equality(8, 3.0);
        let mut rng = sampling::rng_from_seed(23);
        for trial in 0..5 {
            let mut v = vec![0.0; 64];
            for i in 0..8 {
                for j in i..8 {
                    let val = sampling::standard_normal(&mut rng);
                    v[i * 8 + j] = val;
                    v[j * 8 + i] = val;
                }
            }
            let out = dom.lmo(&v, &accurate_cfg(100 + trial)).unwrap();
            let lmo_value = atom_value_against(&out.atom, &v);
            for _ in 0..100 {
                let w = dom.sample_feasible(&mut rng);
                assert!(
                    lmo_value <= linalg::dot(&w, &v) + 1e-9 * (1.0 + lmo_value.abs()),
                    "feasible point beats the LMO"
                );
            }
            let resid = dom.membership_residual(&out.atom.materialize());
            assert!(resid <= 1e-9, "atom residual {resid}");
        }
    }

    #[test]
    fn simplex_lmo_picks_cheapest_vertex() {
        let dom = ScaledSimplex {
            dim: 4,
            radius: 2.0,
        };
        let out = dom
            .lmo(&[0.3, -1.0, 4.0, 0.0], &accurate_cfg(1))
            .unwrap();
        assert_eq!(
            out.atom,
            Atom::Vertex {
                weight: 2.0,
                index: 1,
                dim: 4
            }
        );
        let x = out.atom.materialize();
        assert!(dom.membership_residual(&x) < 1e-15);
    }
}
