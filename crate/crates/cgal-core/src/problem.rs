//! The abstract problem template and the oracle interfaces the solver
//! consumes: a smooth objective, an affine map into a convex constraint set,
//! a compact domain accessed only through its linear minimization oracle,
//! and an optional nonsmooth composite term.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::linalg;
use crate::oracles::{Atom, LanczosConfig, LmoOutcome, OracleError};
use crate::sampling;

/// Smooth convex objective with Lipschitz-continuous gradient.
pub trait SmoothObjective {
    fn eval(&self, x: &[f64]) -> f64;
    fn grad_into(&self, x: &[f64], out: &mut [f64]);
    /// Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
}

/// Linear map together with its adjoint and an upper bound on its operator
/// norm. Ambient points are flat slices; for matrix instances the adjoint
/// must land in the symmetric subspace.
pub trait LinearMap {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn forward_into(&self, x: &[f64], out: &mut [f64]);
    fn adjoint_into(&self, u: &[f64], out: &mut [f64]);
    /// Upper bound on the operator norm. The dual step-size growth rule
    /// consumes this; a slack bound is safe, a lower one is not.
    fn norm_bound(&self) -> f64;

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim()];
        self.forward_into(x, &mut out);
        out
    }

    fn adjoint(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.input_dim()];
        self.adjoint_into(u, &mut out);
        out
    }
}

/// Convex set accessed through Euclidean projection.
pub trait ConstraintSet {
    fn dim(&self) -> usize;
    fn project_into(&self, z: &[f64], out: &mut [f64]);

    fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.project_into(z, &mut out);
        out
    }

    fn distance(&self, z: &[f64]) -> f64 {
        linalg::dist(z, &self.project(z))
    }
}

/// Structural description of a domain, for code that needs exact dense
/// projections or domain-specific invariant checks (reference solver,
/// verification).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    SpectrahedronEq { n: usize, beta: f64 },
    SpectrahedronLe { n: usize, alpha: f64 },
    Simplex { dim: usize, radius: f64 },
    Other,
}

/// Convex compact domain accessed through its linear minimization oracle.
pub trait CompactDomain {
    /// Ambient dimension of the flat representation (n² for n×n matrices).
    fn dim(&self) -> usize;
    /// argmin over the domain of ⟨x, direction⟩.
    fn lmo(&self, direction: &[f64], cfg: &LanczosConfig) -> Result<LmoOutcome, OracleError>;
    /// Euclidean diameter of the domain.
    fn diameter(&self) -> f64;
    /// Distance-to-domain proxy for testing; zero on members.
    fn membership_residual(&self, x: &[f64]) -> f64;
    /// Random feasible point, used by validation and property tests.
    fn sample_feasible(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64>;
    fn kind(&self) -> DomainKind {
        DomainKind::Other
    }
}

/// Convex function accessed through value and proximal oracles.
///
/// `conj_prox_into` (the prox of the Fenchel conjugate) must be implemented
/// independently of `prox_into`, not through the Moreau identity, so the
/// identity stays a meaningful cross-check between the two routes.
pub trait ProxFunction {
    fn eval(&self, z: &[f64]) -> f64;
    /// out = prox_{scale·g}(v)
    fn prox_into(&self, v: &[f64], scale: f64, out: &mut [f64]);
    /// out = prox_{scale·g*}(w)
    fn conj_prox_into(&self, w: &[f64], scale: f64, out: &mut [f64]);
    /// Lipschitz constant of g in the Euclidean norm.
    fn lipschitz(&self) -> f64;

    fn prox(&self, v: &[f64], scale: f64) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.prox_into(v, scale, &mut out);
        out
    }

    fn conj_prox(&self, w: &[f64], scale: f64) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        self.conj_prox_into(w, scale, &mut out);
        out
    }
}

/// Nonsmooth term g(Bx) with its prox oracle and dual prox center.
pub struct NonsmoothTerm {
    pub map: Box<dyn LinearMap + Send + Sync>,
    pub function: Box<dyn ProxFunction + Send + Sync>,
    /// Prox-function center in the dual space; all-zeros by default.
    pub center: Vec<f64>,
}

impl NonsmoothTerm {
    pub fn new(
        map: Box<dyn LinearMap + Send + Sync>,
        function: Box<dyn ProxFunction + Send + Sync>,
    ) -> Self {
        let q = map.output_dim();
        NonsmoothTerm {
            map,
            function,
            center: vec![0.0; q],
        }
    }
}

/// The full problem bundle: minimize f(x) + g(Bx) over x in the domain
/// subject to Ax in the constraint set.
pub struct ProblemSpec {
    pub objective: Box<dyn SmoothObjective + Send + Sync>,
    pub constraint_map: Box<dyn LinearMap + Send + Sync>,
    pub constraint_set: Box<dyn ConstraintSet + Send + Sync>,
    pub domain: Box<dyn CompactDomain + Send + Sync>,
    pub nonsmooth: Option<NonsmoothTerm>,
    /// Known optimal value, for metrics only; never consumed by solvers.
    pub reference_value: Option<f64>,
}

impl ProblemSpec {
    pub fn x_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn constraint_dim(&self) -> usize {
        self.constraint_set.dim()
    }

    pub fn check_dims(&self) -> Result<(), SpecError> {
        if self.constraint_map.input_dim() != self.domain.dim() {
            return Err(SpecError::DimensionMismatch {
                what: "constraint map input vs domain",
                left: self.constraint_map.input_dim(),
                right: self.domain.dim(),
            });
        }
        if self.constraint_map.output_dim() != self.constraint_set.dim() {
            return Err(SpecError::DimensionMismatch {
                what: "constraint map output vs constraint set",
                left: self.constraint_map.output_dim(),
                right: self.constraint_set.dim(),
            });
        }
        if let Some(term) = &self.nonsmooth {
            if term.map.input_dim() != self.domain.dim() {
                return Err(SpecError::DimensionMismatch {
                    what: "composite map input vs domain",
                    left: term.map.input_dim(),
                    right: self.domain.dim(),
                });
            }
            if term.center.len() != term.map.output_dim() {
                return Err(SpecError::DimensionMismatch {
                    what: "composite center vs composite map output",
                    left: term.center.len(),
                    right: term.map.output_dim(),
                });
            }
        }
        Ok(())
    }

    /// f(x) plus g(Bx) when the composite term is present.
    pub fn full_objective(&self, x: &[f64]) -> f64 {
        let mut value = self.objective.eval(x);
        if let Some(term) = &self.nonsmooth {
            value += term.function.eval(&term.map.forward(x));
        }
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("dimension mismatch ({what}): {left} vs {right}")]
    DimensionMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("invalid configuration: {0}")]
    Invalid(&'static str),
}

/// Max relative adjoint defect |⟨Ax,u⟩ − ⟨x,Aᵀu⟩| / (‖Ax‖‖u‖ + ε) over
/// seeded random trials. Validates the (A, Aᵀ) pair used throughout the
/// solver loop.
pub fn check_adjoint(
    op: &dyn LinearMap,
    trials: usize,
    rng_seed: u64,
) -> Result<f64, SpecError> {
    if op.input_dim() == 0 || op.output_dim() == 0 {
        return Err(SpecError::Invalid("operator has a zero dimension"));
    }
    let mut rng = sampling::rng_from_seed(rng_seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = sampling::gaussian_vec(&mut rng, op.input_dim());
        let u = sampling::gaussian_vec(&mut rng, op.output_dim());
        let ax = op.forward(&x);
        let atu = op.adjoint(&u);
        let defect = (linalg::dot(&ax, &u) - linalg::dot(&x, &atu)).abs();
        let scale = linalg::norm(&ax) * linalg::norm(&u) + f64::EPSILON;
        worst = worst.max(defect / scale);
    }
    Ok(worst)
}

/// Safety factor applied on top of a power-iteration norm estimate before
/// it is used as `norm_bound`; the estimate approaches ‖A‖ from below.
pub const NORM_SAFETY_FACTOR: f64 = 1.01;

/// Power iteration on AᵀA. Returns √(Rayleigh quotient), a lower estimate
/// of ‖A‖ that is nondecreasing in the iteration count.
pub fn estimate_operator_norm(
    op: &dyn LinearMap,
    iterations: usize,
    rng_seed: u64,
) -> Result<f64, SpecError> {
    if iterations == 0 {
        return Err(SpecError::Invalid("iteration count must be at least 1"));
    }
    if op.input_dim() == 0 || op.output_dim() == 0 {
        return Err(SpecError::Invalid("operator has a zero dimension"));
    }
    let mut rng = sampling::rng_from_seed(rng_seed);
    let mut w = sampling::unit_vector(&mut rng, op.input_dim());
    let mut image = vec![0.0; op.output_dim()];
    let mut back = vec![0.0; op.input_dim()];
    for _ in 0..iterations {
        op.forward_into(&w, &mut image);
        op.adjoint_into(&image, &mut back);
        let nrm = linalg::norm(&back);
        if nrm < 1e-300 {
            return Ok(0.0);
        }
        for (wi, bi) in w.iter_mut().zip(&back) {
            *wi = bi / nrm;
        }
    }
    op.forward_into(&w, &mut image);
    Ok(linalg::norm(&image))
}

/// Norm estimate inflated by [`NORM_SAFETY_FACTOR`], suitable as
/// `norm_bound` for user-supplied maps without an analytic bound.
pub fn estimated_norm_bound(
    op: &dyn LinearMap,
    iterations: usize,
    rng_seed: u64,
) -> Result<f64, SpecError> {
    Ok(estimate_operator_norm(op, iterations, rng_seed)? * NORM_SAFETY_FACTOR)
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub trials: usize,
    pub seed: u64,
    pub adjoint_tol: f64,
    pub lmo_tol: f64,
    pub feasible_samples: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            trials: 20,
            seed: 0x5eed,
            adjoint_tol: 1e-12,
            lmo_tol: 1e-9,
            feasible_samples: 100,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub adjoint_error: f64,
    pub worst_norm_excess: f64,
    pub worst_lmo_gap: f64,
    pub worst_membership_residual: f64,
    pub worst_projection_defect: f64,
    pub worst_prox_defect: f64,
}

/// Runs the oracle consistency suite on a problem: adjoint pairing, norm
/// bound, LMO optimality against sampled feasible points, projection
/// identities, and prox optimality for the composite term.
pub fn validate_problem(
    problem: &ProblemSpec,
    cfg: &ValidationConfig,
) -> Result<ValidationReport, SpecError> {
    problem.check_dims()?;
    let mut report = ValidationReport::default();

    report.adjoint_error = check_adjoint(&*problem.constraint_map, cfg.trials, cfg.seed)?;
    if let Some(term) = &problem.nonsmooth {
        let b_err = check_adjoint(&*term.map, cfg.trials, sampling::derive_seed(cfg.seed, 1))?;
        report.adjoint_error = report.adjoint_error.max(b_err);
    }
    if report.adjoint_error > cfg.adjoint_tol {
        return Err(SpecError::Invalid("adjoint consistency check failed"));
    }

    let mut rng = sampling::rng_from_seed(sampling::derive_seed(cfg.seed, 2));
    let bound = problem.constraint_map.norm_bound();
    for _ in 0..cfg.trials {
        let x = sampling::unit_vector(&mut rng, problem.x_dim());
        let image_norm = linalg::norm(&problem.constraint_map.forward(&x));
        let excess = image_norm - bound;
        report.worst_norm_excess = report.worst_norm_excess.max(excess);
    }
    if report.worst_norm_excess > 1e-9 * (1.0 + bound) {
        return Err(SpecError::Invalid("operator norm bound is not an upper bound"));
    }

    // LMO optimality: the oracle's value must not exceed the value at any
    // sampled feasible point.
    let lmo_cfg = LanczosConfig {
        max_iterations: 256,
        tolerance: 1e-12,
        rng_seed: sampling::derive_seed(cfg.seed, 3),
        restarts: 3,
    };
    for trial in 0..cfg.trials {
        let v = sampling::gaussian_vec(&mut rng, problem.x_dim());
        let outcome = problem
            .domain
            .lmo(&v, &lmo_cfg)
            .map_err(|_| SpecError::Invalid("LMO failed during validation"))?;
        let lmo_value = atom_value_against(&outcome.atom, &v);
        let scale = 1.0 + lmo_value.abs();
        for _ in 0..cfg.feasible_samples {
            let w = problem.domain.sample_feasible(&mut rng);
            let gap = lmo_value - linalg::dot(&w, &v);
            report.worst_lmo_gap = report.worst_lmo_gap.max(gap / scale);
        }
        if trial < 4 {
            let dense = outcome.atom.materialize();
            let resid = problem.domain.membership_residual(&dense);
            report.worst_membership_residual = report.worst_membership_residual.max(resid);
        }
    }
    if report.worst_lmo_gap > cfg.lmo_tol {
        return Err(SpecError::Invalid("LMO returned a suboptimal atom"));
    }
    if report.worst_membership_residual > cfg.lmo_tol {
        return Err(SpecError::Invalid("LMO atom left the domain"));
    }

    // Projection identities: idempotence, distance consistency, firm
    // nonexpansiveness spot check, and the variational inequality.
    let set = &*problem.constraint_set;
    let p = set.dim();
    for _ in 0..cfg.trials {
        let a = sampling::gaussian_vec(&mut rng, p);
        let b = sampling::gaussian_vec(&mut rng, p);
        let pa = set.project(&a);
        let ppa = set.project(&pa);
        let scale = 1.0 + linalg::norm(&pa);
        report.worst_projection_defect = report
            .worst_projection_defect
            .max(linalg::dist(&ppa, &pa) / scale);
        let dist_defect = (set.distance(&a) - linalg::dist(&a, &pa)).abs() / scale;
        report.worst_projection_defect = report.worst_projection_defect.max(dist_defect);
        let pb = set.project(&b);
        let expansion = linalg::dist(&pa, &pb) - linalg::dist(&a, &b);
        report.worst_projection_defect = report
            .worst_projection_defect
            .max(expansion / (1.0 + linalg::dist(&a, &b)));
        // ⟨a − Pa, w − Pa⟩ ≤ 0 for feasible w
        let w = set.project(&sampling::gaussian_vec(&mut rng, p));
        let mut inner = 0.0;
        for i in 0..p {
            inner += (a[i] - pa[i]) * (w[i] - pa[i]);
        }
        report.worst_projection_defect = report
            .worst_projection_defect
            .max(inner / (scale * scale));
    }
    if report.worst_projection_defect > 1e-10 {
        return Err(SpecError::Invalid("constraint set projection is inconsistent"));
    }

    if let Some(term) = &problem.nonsmooth {
        let q = term.map.output_dim();
        for _ in 0..cfg.trials {
            let zpt = sampling::gaussian_vec(&mut rng, q);
            let t = 0.1 + 1.9 * rand::Rng::gen::<f64>(&mut rng);
            let u = term.function.prox(&zpt, t);
            let w = sampling::gaussian_vec(&mut rng, q);
            let obj_u = term.function.eval(&u) + linalg::dist(&zpt, &u).powi(2) / (2.0 * t);
            let obj_w = term.function.eval(&w) + linalg::dist(&zpt, &w).powi(2) / (2.0 * t);
            let defect = (obj_u - obj_w).max(0.0) / (1.0 + obj_u.abs());
            report.worst_prox_defect = report.worst_prox_defect.max(defect);
        }
        if report.worst_prox_defect > 1e-10 {
            return Err(SpecError::Invalid("prox oracle is not a minimizer"));
        }
    }

    Ok(report)
}

/// ⟨atom, v⟩ without materializing the atom.
pub fn atom_value_against(atom: &Atom, v: &[f64]) -> f64 {
    match atom {
        Atom::Zero { .. } => 0.0,
        Atom::Vertex { weight, index, .. } => weight * v[*index],
        Atom::Rank1 { weight, vector } => {
            let n = vector.len();
            debug_assert_eq!(v.len(), n * n);
            let mut quad = 0.0;
            for i in 0..n {
                let row = &v[i * n..(i + 1) * n];
                quad += vector[i] * linalg::dot(row, vector);
            }
            weight * quad
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{DiagExtraction, IdentityMap, ScaledMap};

    #[test]
    fn check_adjoint_identity_is_exact() {
        let op = IdentityMap { dim: 6 };
        let err = check_adjoint(&op, 20, 7).unwrap();
        assert!(err <= 1e-15, "identity adjoint defect {err}");
    }

    #[test]
    fn check_adjoint_diag_extraction() {
        let op = DiagExtraction { n: 3 };
        let err = check_adjoint(&op, 30, 11).unwrap();
        assert!(err <= 1e-14, "diag extraction adjoint defect {err}");
    }

    #[test]
    fn check_adjoint_flags_scaled_adjoint() {
        // Identity forward paired with a doubled adjoint: the defect is
        // |⟨x,u⟩| / (‖x‖‖u‖), clearly far from zero.
        struct BrokenAdjoint {
            dim: usize,
        }
        impl LinearMap for BrokenAdjoint {
            fn input_dim(&self) -> usize {
                self.dim
            }
            fn output_dim(&self) -> usize {
                self.dim
            }
            fn forward_into(&self, x: &[f64], out: &mut [f64]) {
                out.copy_from_slice(x);
            }
            fn adjoint_into(&self, u: &[f64], out: &mut [f64]) {
                for (o, ui) in out.iter_mut().zip(u) {
                    *o = 2.0 * ui;
                }
            }
            fn norm_bound(&self) -> f64 {
                1.0
            }
        }
        let op = BrokenAdjoint { dim: 4 };
        let err = check_adjoint(&op, 20, 5).unwrap();
        // max over trials of |cos angle| between random x, u
        let mut rng = sampling::rng_from_seed(5);
        let mut expected = 0.0f64;
        for _ in 0..20 {
            let x = sampling::gaussian_vec(&mut rng, 4);
            let u = sampling::gaussian_vec(&mut rng, 4);
            let defect = linalg::dot(&x, &u).abs();
            let scale = linalg::norm(&x) * linalg::norm(&u) + f64::EPSILON;
            expected = expected.max(defect / scale);
        }
        assert!((err - expected).abs() < 1e-15);
        assert!(err > 0.1, "scaled adjoint must be flagged, got {err}");
    }

    #[test]
    fn norm_estimate_scaled_identity() {
        let op = ScaledMap { dim: 3, factor: 2.0 };
        let est = estimate_operator_norm(&op, 50, 3).unwrap();
        assert!((est - 2.0).abs() <= 1e-9, "estimate {est}");
    }

    #[test]
    fn norm_estimate_diag_extraction_is_one() {
        let op = DiagExtraction { n: 4 };
        let est = estimate_operator_norm(&op, 200, 9).unwrap();
        assert!((est - 1.0).abs() <= 1e-9, "estimate {est}");
    }

    #[test]
    fn norm_estimate_monotone_in_iterations() {
        let op = DiagExtraction { n: 5 };
        let mut prev = 0.0;
        for iters in [1usize, 2, 4, 8, 16, 32] {
            let est = estimate_operator_norm(&op, iters, 21).unwrap();
            assert!(est >= prev - 1e-13, "not monotone at {iters}: {est} < {prev}");
            assert!(est <= 1.0 + 1e-9);
            prev = est;
        }
    }

    #[test]
    fn norm_estimate_zero_operator() {
        let op = crate::instances::ZeroMap {
            input_dim: 4,
            output_dim: 2,
        };
        assert_eq!(estimate_operator_norm(&op, 10, 1).unwrap(), 0.0);
    }

    #[test]
    fn norm_estimate_rejects_zero_iterations() {
        let op = IdentityMap { dim: 2 };
        assert!(estimate_operator_norm(&op, 0, 1).is_err());
    }
}
