//! Cell-centred finite-volume discretisation of `-div(Q ∇u) = f v` with
//! homogeneous Dirichlet data, and the quantities built on its energy form.
//!
//! Each pair of adjacent cells is coupled by a transmissibility
//! `T = |face| Q_face / distance`; cells next to the boundary are coupled to
//! a zero exterior value at half a cell. The bilinear form `ψᵀ K u` is the
//! discrete `∫ ∇ψ · Q ∇u dx`.

pub mod sparse;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{integrate, lp_norm, unit_sphere_area, Geometry, ScalarField, WeightedDomain};
pub use sparse::{pcg, CgSolution, CsrMatrix};

/// Provenance of the coefficient field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Ellipticity {
    /// `Q = I`.
    Uniform,
    /// `Q = |x|^alpha I`, paired with the weight `v = |x|^alpha`.
    A2Degenerate { alpha: f64 },
    Custom,
}

/// A coefficient field `Q` on a weighted domain. `Q` is stored per node
/// either as a scalar multiple of the identity or as a diagonal matrix
/// (one entry per axis).
#[derive(Debug, Clone)]
pub struct EllipticOperatorSpec {
    dom: WeightedDomain,
    q: Vec<f64>,
    components: usize,
    k_bound: f64,
    tag: Ellipticity,
}

impl EllipticOperatorSpec {
    /// `Q = I`.
    pub fn uniform(dom: &WeightedDomain) -> Result<Self> {
        Self::build(dom, vec![1.0; dom.len()], 1, Ellipticity::Uniform)
    }

    /// `Q = |x|^alpha I` on a domain whose weight is `|x|^alpha`.
    pub fn a2_degenerate(dom: &WeightedDomain, alpha: f64) -> Result<Self> {
        let q = (0..dom.len()).map(|i| dom.radius_of(i).powf(alpha)).collect();
        Self::build(dom, q, 1, Ellipticity::A2Degenerate { alpha })
    }

    /// Arbitrary nodal coefficients: `components` is 1 (isotropic) or the
    /// domain dimension (diagonal).
    pub fn custom(dom: &WeightedDomain, q: Vec<f64>, components: usize) -> Result<Self> {
        Self::build(dom, q, components, Ellipticity::Custom)
    }

    fn build(dom: &WeightedDomain, q: Vec<f64>, components: usize, tag: Ellipticity) -> Result<Self> {
        if components != 1 && components != dom.dim() {
            return Err(Error::Structural(format!("Q needs 1 or {} components per node", dom.dim())));
        }
        if q.len() != components * dom.len() {
            return Err(Error::Structural(format!("{} Q entries for {} nodes", q.len(), dom.len())));
        }
        if let Some(bad) = q.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Construction(format!("Q has eigenvalue {bad}; it must be nonnegative definite")));
        }
        if matches!(dom.geometry(), Geometry::Tabulated { .. }) {
            return Err(Error::Construction("tabulated domains carry no cell adjacency".into()));
        }
        let mut k_bound: f64 = 0.0;
        for i in 0..dom.len() {
            let op = q[i * components..(i + 1) * components].iter().fold(0.0f64, |m, x| m.max(*x));
            let v = dom.weights()[i];
            if v > 0.0 {
                k_bound = k_bound.max(op / v);
            } else if op > 0.0 {
                return Err(Error::Construction(format!("Q is nonzero at node {i} where v vanishes")));
            }
        }
        Ok(Self { dom: dom.clone(), q, components, k_bound, tag })
    }

    pub fn dom(&self) -> &WeightedDomain {
        &self.dom
    }

    pub fn tag(&self) -> Ellipticity {
        self.tag
    }

    /// Smallest `k` with `|Q(x_i)|_op <= k v(x_i)` at every node.
    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    /// Diagonal entry `axis` of `Q` at node `i`.
    pub fn q_at(&self, i: usize, axis: usize) -> f64 {
        if self.components == 1 {
            self.q[i]
        } else {
            self.q[i * self.components + axis]
        }
    }

    /// `Q` on a face. Known closed forms are evaluated at the face itself;
    /// nodal data is averaged from the adjacent cells.
    fn face_q(&self, face: &[f64], cells: (usize, Option<usize>), axis: usize) -> f64 {
        match self.tag {
            Ellipticity::Uniform => 1.0,
            Ellipticity::A2Degenerate { alpha } => face.iter().map(|x| x * x).sum::<f64>().sqrt().powf(alpha),
            Ellipticity::Custom => match cells {
                (i, Some(j)) => 0.5 * (self.q_at(i, axis) + self.q_at(j, axis)),
                (i, None) => self.q_at(i, axis),
            },
        }
    }

    /// Every coupling of the scheme as `(i, Some(j), T)` for interior faces
    /// and `(i, None, T)` for boundary faces.
    fn couplings(&self) -> Vec<(usize, Option<usize>, f64)> {
        let dom = &self.dom;
        let mut out = Vec::new();
        match dom.geometry() {
            Geometry::Interval { .. } => {
                let e = dom.edges().expect("interval has edges");
                let n = dom.len();
                let x = |i: usize| dom.node(i)[0];
                out.push((0, None, self.face_q(&[e[0]], (0, None), 0) / (x(0) - e[0])));
                for i in 0..n - 1 {
                    out.push((i, Some(i + 1), self.face_q(&[e[i + 1]], (i, Some(i + 1)), 0) / (x(i + 1) - x(i))));
                }
                out.push((n - 1, None, self.face_q(&[e[n]], (n - 1, None), 0) / (e[n] - x(n - 1))));
            }
            Geometry::RadialBall { n: dim, .. } => {
                let e = dom.edges().expect("radial ball has edges");
                let n = dom.len();
                let area = |r: f64| unit_sphere_area(*dim) * r.powi(*dim as i32 - 1);
                let r = |i: usize| dom.node(i)[0];
                // The face at the origin has zero area: no flux, by symmetry.
                for i in 0..n - 1 {
                    let face = e[i + 1];
                    out.push((i, Some(i + 1), area(face) * self.face_q(&[face], (i, Some(i + 1)), 0) / (r(i + 1) - r(i))));
                }
                let face = e[n];
                out.push((n - 1, None, area(face) * self.face_q(&[face], (n - 1, None), 0) / (face - r(n - 1))));
            }
            Geometry::Box { axes } => {
                let dim = axes.len();
                let widths: Vec<f64> = axes.iter().map(|a| a.width()).collect();
                let counts: Vec<usize> = axes.iter().map(|a| a.cells).collect();
                let mut stride = vec![1usize; dim];
                for k in (0..dim.saturating_sub(1)).rev() {
                    stride[k] = stride[k + 1] * counts[k + 1];
                }
                let cell_volume: f64 = widths.iter().product();
                for i in 0..dom.len() {
                    let centre = dom.node(i).to_vec();
                    for k in 0..dim {
                        let idx = (i / stride[k]) % counts[k];
                        let area = cell_volume / widths[k];
                        let mut face = centre.clone();
                        if idx == 0 {
                            face[k] = axes[k].lo;
                            out.push((i, None, area * self.face_q(&face, (i, None), k) / (0.5 * widths[k])));
                        }
                        face[k] = centre[k] + 0.5 * widths[k];
                        if idx + 1 < counts[k] {
                            let j = i + stride[k];
                            out.push((i, Some(j), area * self.face_q(&face, (i, Some(j)), k) / widths[k]));
                        } else {
                            face[k] = axes[k].hi;
                            out.push((i, None, area * self.face_q(&face, (i, None), k) / (0.5 * widths[k])));
                        }
                    }
                }
            }
            Geometry::Tabulated { .. } => unreachable!("rejected at construction"),
        }
        out
    }

    /// Stiffness matrix and the per-cell boundary coupling.
    pub fn stiffness(&self) -> (CsrMatrix, Vec<f64>) {
        let n = self.dom.len();
        let mut triplets = Vec::new();
        let mut boundary = vec![0.0; n];
        for (i, j, t) in self.couplings() {
            match j {
                Some(j) => {
                    triplets.push((i, i, t));
                    triplets.push((j, j, t));
                    triplets.push((i, j, -t));
                    triplets.push((j, i, -t));
                }
                None => {
                    triplets.push((i, i, t));
                    boundary[i] += t;
                }
            }
        }
        (CsrMatrix::from_triplets(n, &triplets), boundary)
    }

    /// Discrete `∫ ∇ψ · Q ∇u dx`.
    pub fn energy_form(&self, psi: &ScalarField, u: &ScalarField) -> Result<f64> {
        psi.check_on(&self.dom)?;
        u.check_on(&self.dom)?;
        let (k, _) = self.stiffness();
        Ok(sparse::dot(psi.values(), &k.mul(u.values())))
    }
}

/// The linear system `K u = b` of a Dirichlet problem.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub stiffness: CsrMatrix,
    /// `b_i = f_i v_i |cell_i|`.
    pub load: Vec<f64>,
    /// Coupling of each cell to the zero boundary value; nonzero exactly
    /// for cells that touch the boundary.
    pub boundary_coupling: Vec<f64>,
    domain_id: u64,
}

impl DiscreteSystem {
    pub fn boundary_mask(&self) -> Vec<bool> {
        self.boundary_coupling.iter().map(|t| *t > 0.0).collect()
    }

    /// `K` with the boundary couplings removed: the pure Neumann operator.
    pub fn interior_stiffness(&self) -> CsrMatrix {
        let n = self.stiffness.dim();
        let mut triplets: Vec<(usize, usize, f64)> =
            (0..n).flat_map(|i| self.stiffness.row(i).map(move |(j, v)| (i, j, v))).collect();
        triplets.extend(self.boundary_coupling.iter().enumerate().map(|(i, t)| (i, i, -t)));
        CsrMatrix::from_triplets(n, &triplets)
    }
}

pub fn assemble(spec: &EllipticOperatorSpec, f: &ScalarField) -> Result<DiscreteSystem> {
    f.check_on(&spec.dom)?;
    let (stiffness, boundary_coupling) = spec.stiffness();
    let load = f.values().iter().zip(spec.dom.masses()).map(|(f, m)| f * m).collect();
    Ok(DiscreteSystem { stiffness, load, boundary_coupling, domain_id: spec.dom.id() })
}

/// Solution together with solver diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: ScalarField,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `K u = b` by IC(0)-preconditioned CG to relative residual `rtol`.
pub fn solve(sys: &DiscreteSystem, rtol: f64) -> Result<ScalarField> {
    solve_with_report(sys, rtol).map(|r| r.u)
}

pub fn solve_with_report(sys: &DiscreteSystem, rtol: f64) -> Result<SolveReport> {
    if !(rtol > 0.0 && rtol <= 1e-4) {
        return Err(Error::domain(format!("solver tolerance must lie in (0, 1e-4], got {rtol}")));
    }
    let n = sys.stiffness.dim();
    let sol = pcg(&sys.stiffness, &sys.load, rtol, 10_000 + 2 * n)?;
    Ok(SolveReport {
        u: ScalarField::relabel(sol.x, sys.domain_id),
        iterations: sol.iterations,
        relative_residual: sol.relative_residual,
    })
}

/// Assembles and solves `-div(Q ∇u) = f v`.
pub fn solve_problem(spec: &EllipticOperatorSpec, f: &ScalarField, rtol: f64) -> Result<ScalarField> {
    solve(&assemble(spec, f)?, rtol)
}

/// `max_ψ [∫ ∇ψ · Q ∇u dx - ∫ f ψ v dx]` over the given test functions.
/// A value `<= tol` certifies `u` as a discrete subsolution for those ψ.
pub fn weak_residual(spec: &EllipticOperatorSpec, u: &ScalarField, f: &ScalarField, tests: &[ScalarField]) -> Result<f64> {
    u.check_on(&spec.dom)?;
    f.check_on(&spec.dom)?;
    if tests.is_empty() {
        return Err(Error::domain("no test functions"));
    }
    let (k, _) = spec.stiffness();
    let ku = k.mul(u.values());
    let mut worst = f64::NEG_INFINITY;
    for psi in tests {
        psi.check_on(&spec.dom)?;
        let energy = sparse::dot(psi.values(), &ku);
        let load = integrate(&psi.product(f)?, &spec.dom)?;
        worst = worst.max(energy - load);
    }
    Ok(worst)
}

/// Cell indicators, the finite-volume counterpart of nodal hat functions.
pub fn cell_indicators(dom: &WeightedDomain) -> Vec<ScalarField> {
    (0..dom.len())
        .map(|i| {
            let mut values = vec![0.0; dom.len()];
            values[i] = 1.0;
            ScalarField::relabel(values, dom.id())
        })
        .collect()
}

/// `‖ψ‖_{L^{2σ}(v)} / (∫ |√Q ∇ψ|²)^{1/2}`.
pub fn sobolev_quotient(spec: &EllipticOperatorSpec, psi: &ScalarField, sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(Error::domain(format!("Sobolev gain must be > 1, got {sigma}")));
    }
    let energy = spec.energy_form(psi, psi)?;
    if !(energy > 0.0) {
        return Err(Error::domain("test function has zero energy"));
    }
    Ok(lp_norm(psi, 2.0 * sigma, &spec.dom)? / energy.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevReport {
    pub sigma: f64,
    /// Largest quotient seen: a lower bound for the Sobolev constant.
    pub c0_lower: f64,
    /// Index of the maximiser within the family.
    pub argmax: usize,
}

pub fn estimate_c0(spec: &EllipticOperatorSpec, sigma: f64, family: &[ScalarField]) -> Result<SobolevReport> {
    let mut best = SobolevReport { sigma, c0_lower: 0.0, argmax: 0 };
    for (idx, psi) in family.iter().enumerate() {
        let q = sobolev_quotient(spec, psi, sigma)?;
        if q > best.c0_lower {
            best = SobolevReport { sigma, c0_lower: q, argmax: idx };
        }
    }
    if best.c0_lower > 0.0 {
        Ok(best)
    } else {
        Err(Error::domain("test family is empty"))
    }
}

/// Standard test family: tents of several widths and, on balls,
/// truncated bubbles `(ε² + |x|²)^{-(n-2)/2}` minus their boundary value,
/// plus powers of the distance to the boundary.
pub fn test_family(dom: &WeightedDomain) -> Vec<ScalarField> {
    let mut fam = Vec::new();
    let mut push = |g: &dyn Fn(&[f64]) -> f64| {
        if let Ok(f) = ScalarField::from_fn(dom, |x| g(x)) {
            if f.abs_max() > 0.0 {
                fam.push(f);
            }
        }
    };
    match dom.geometry().clone() {
        Geometry::Interval { a, b } => {
            let len = b - a;
            for s in [0.5, 1.0, 2.0] {
                push(&|x| ((x[0] - a) * (b - x[0]) / (len * len)).max(0.0).powf(s));
            }
            for j in 1..=6 {
                let rho = 0.5 * len * 0.5f64.powi(j - 1);
                for c in [0.5, 0.25, 0.75] {
                    let centre = a + c * len;
                    push(&|x| (1.0 - (x[0] - centre).abs() / rho).max(0.0));
                }
            }
        }
        Geometry::RadialBall { n, radius } => {
            for s in [0.5, 1.0, 2.0, 4.0] {
                push(&|x| (1.0 - (x[0] / radius).powi(2)).max(0.0).powf(s));
            }
            for j in 0..8 {
                let rho = radius * 0.5f64.powi(j);
                push(&|x| (1.0 - x[0] / rho).max(0.0));
            }
            let e = (n as f64 - 2.0) / 2.0;
            // Bubbles narrower than a few cells are not resolved and would
            // overstate the quotient.
            let finest = 4.0 * dom.edges().map_or(0.0, |e| e[1]);
            if e > 0.0 {
                for j in (1..=30).take_while(|j| radius * 0.5f64.powi(*j) >= finest) {
                    let eps = radius * 0.5f64.powi(j);
                    let edge = (eps * eps + radius * radius).powf(-e);
                    push(&|x| ((eps * eps + x[0] * x[0]).powf(-e) - edge).max(0.0));
                }
            }
        }
        Geometry::Box { axes } => {
            let tent = |x: &[f64], shrink: f64| -> f64 {
                axes.iter()
                    .zip(x)
                    .map(|(ax, xi)| {
                        let mid = 0.5 * (ax.lo + ax.hi);
                        let half = 0.5 * (ax.hi - ax.lo) * shrink;
                        (1.0 - (xi - mid).abs() / half).max(0.0)
                    })
                    .product()
            };
            for j in 0..5 {
                let s = 0.5f64.powi(j);
                push(&|x| tent(x, s));
            }
            for s in [0.5, 1.0, 2.0] {
                push(&|x| {
                    axes.iter()
                        .zip(x)
                        .map(|(ax, xi)| ((xi - ax.lo) * (ax.hi - xi) * 4.0 / (ax.hi - ax.lo).powi(2)).max(0.0))
                        .product::<f64>()
                        .powf(s)
                });
            }
        }
        Geometry::Tabulated { .. } => {}
    }
    fam
}

/// `w = e^{αu} - 1`.
pub fn exp_transform(u: &ScalarField, alpha: f64) -> Result<ScalarField> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("exponent must be > 0, got {alpha}")));
    }
    check_nonnegative(u)?;
    if alpha * u.max() > 700.0 {
        return Err(Error::Range(format!("α·max(u) = {} exceeds 700", alpha * u.max())));
    }
    Ok(u.map(|x| (alpha * x.max(0.0)).exp_m1()))
}

/// Rejects fields with negative values beyond round-off.
fn check_nonnegative(u: &ScalarField) -> Result<()> {
    let slack = 1e-10 * u.abs_max().max(1e-300);
    if u.min() < -slack {
        return Err(Error::domain(format!("field must be nonnegative, min is {}", u.min())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpIntegrabilityReport {
    pub gamma: f64,
    pub integral: f64,
    /// `None` when `γ` lies outside `(0, 4/C0²)`, where no budget exists.
    pub m_budget: Option<f64>,
}

/// Budget `M = v(Ω)(1+κ)²` with `κ = C0²γ / (2(1 - C0²γ/4))`, the bound on
/// `∫ e^{γu} v` for solutions with `‖f‖_{σ'} <= 1`. Defined for
/// `0 < γ < 4/C0²`.
pub fn exp_budget(gamma: f64, c0: f64, total_mass: f64) -> Option<f64> {
    let s = c0 * c0 * gamma;
    if !(gamma > 0.0 && s < 4.0) {
        return None;
    }
    let kappa = s / (2.0 * (1.0 - s / 4.0));
    Some(total_mass * (1.0 + kappa).powi(2))
}

/// `∫ e^{γu} v dx` compared to the budget for a given `C0`.
pub fn exp_integral(u: &ScalarField, gamma: f64, c0: f64, dom: &WeightedDomain) -> Result<ExpIntegrabilityReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("γ must be > 0, got {gamma}")));
    }
    u.check_on(dom)?;
    if gamma * u.max() > 700.0 {
        return Err(Error::Range(format!("γ·max(u) = {} exceeds 700", gamma * u.max())));
    }
    let integral = integrate(&u.map(|x| (gamma * x).exp()), dom)?;
    Ok(ExpIntegrabilityReport { gamma, integral, m_budget: exp_budget(gamma, c0, dom.total_mass()) })
}
