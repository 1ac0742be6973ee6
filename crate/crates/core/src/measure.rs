//! Discrete weighted domains and the fields that live on them.
//!
//! Every domain is a list of cells, each with a centre (the node), a
//! positive volume and a weight sample taken at the centre. Weighted
//! integrals are midpoint sums `Σ g_i v_i |cell_i|`, and level sets are
//! counted by whole cells.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};

static NEXT_DOMAIN_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_DOMAIN_ID.fetch_add(1, Ordering::Relaxed)
}

/// Surface area of the unit sphere in `R^n`, `2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// One axis of a tensor-product box: `cells` uniform cells on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl Axis {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Geometry {
    Interval { a: f64, b: f64 },
    /// Radially symmetric ball in `R^n`, reduced to the radius.
    RadialBall { n: usize, radius: f64 },
    Box { axes: Vec<Axis> },
    /// Cells read back from a file; no adjacency is known.
    Tabulated { dim: usize },
}

/// How to sample a weight at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WeightSpec {
    Constant(f64),
    /// `|x|^alpha`.
    Power { alpha: f64 },
    /// One value per cell, in node order.
    Samples(Vec<f64>),
}

impl WeightSpec {
    pub fn uniform() -> Self {
        WeightSpec::Constant(1.0)
    }

    fn sample(&self, i: usize, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Constant(c) => *c,
            WeightSpec::Power { alpha } => euclidean(x).powf(*alpha),
            WeightSpec::Samples(s) => s[i],
        }
    }
}

fn euclidean(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// A finite weighted measure space built from cells.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedDomain {
    #[serde(skip)]
    id: u64,
    geometry: Geometry,
    dim: usize,
    coords: Vec<f64>,
    /// Cell boundaries for one-dimensional layouts (interval and radial).
    edges: Option<Vec<f64>>,
    cell_volumes: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl WeightedDomain {
    /// `cells` uniform cells on `[a, b]`.
    pub fn interval(a: f64, b: f64, cells: usize, weight: &WeightSpec) -> Result<Self> {
        if !(a < b) || cells == 0 {
            return Err(Error::Construction(format!("bad interval [{a}, {b}] with {cells} cells")));
        }
        Self::interval_with_edges(uniform_edges(a, b, cells), weight)
    }

    pub fn interval_with_edges(edges: Vec<f64>, weight: &WeightSpec) -> Result<Self> {
        check_edges(&edges)?;
        let (a, b) = (edges[0], edges[edges.len() - 1]);
        let coords: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let vols: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
        Self::assemble(Geometry::Interval { a, b }, 1, coords, Some(edges), vols, weight)
    }

    /// Radial ball of dimension `n` with `cells` uniform shells.
    pub fn ball(n: usize, radius: f64, cells: usize, weight: &WeightSpec) -> Result<Self> {
        if !(radius > 0.0) || cells == 0 {
            return Err(Error::Construction(format!("bad ball radius {radius} with {cells} cells")));
        }
        Self::ball_with_edges(n, uniform_edges(0.0, radius, cells), weight)
    }

    /// Radial ball with explicit shell boundaries `0 = e_0 < ... < e_N = R`.
    /// Shell volumes are exact, `ω_{n-1} (e_{i+1}^n - e_i^n) / n`.
    pub fn ball_with_edges(n: usize, edges: Vec<f64>, weight: &WeightSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("ball dimension must be >= 1".into()));
        }
        check_edges(&edges)?;
        if edges[0] != 0.0 {
            return Err(Error::Construction("radial edges must start at 0".into()));
        }
        let radius = edges[edges.len() - 1];
        let area = unit_sphere_area(n);
        let nf = n as i32;
        let coords: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let vols: Vec<f64> =
            edges.windows(2).map(|w| area / n as f64 * (w[1].powi(nf) - w[0].powi(nf))).collect();
        Self::assemble(Geometry::RadialBall { n, radius }, 1, coords, Some(edges), vols, weight)
    }

    /// Tensor-product box with uniform cells along each axis. Node order
    /// is row-major with the last axis fastest.
    pub fn boxed(axes: Vec<Axis>, weight: &WeightSpec) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| !(a.lo < a.hi) || a.cells == 0) {
            return Err(Error::Construction("box axes must be nonempty intervals".into()));
        }
        let dim = axes.len();
        let total: usize = axes.iter().map(|a| a.cells).product();
        let cell_volume: f64 = axes.iter().map(Axis::width).product();
        let mut coords = Vec::with_capacity(total * dim);
        let mut index = vec![0usize; dim];
        for _ in 0..total {
            for (k, ax) in axes.iter().enumerate() {
                coords.push(ax.lo + (index[k] as f64 + 0.5) * (ax.hi - ax.lo) / ax.cells as f64);
            }
            for k in (0..dim).rev() {
                index[k] += 1;
                if index[k] < axes[k].cells {
                    break;
                }
                index[k] = 0;
            }
        }
        Self::assemble(Geometry::Box { axes }, dim, coords, None, vec![cell_volume; total], weight)
    }

    /// Domain made of loose cells (coordinates, volumes and weights given).
    pub fn tabulated(dim: usize, coords: Vec<f64>, cell_volumes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * cell_volumes.len() {
            return Err(Error::Structural("coordinate count does not match cell count".into()));
        }
        Self::assemble(Geometry::Tabulated { dim }, dim, coords, None, cell_volumes, &WeightSpec::Samples(weights))
    }

    fn assemble(
        geometry: Geometry,
        dim: usize,
        coords: Vec<f64>,
        edges: Option<Vec<f64>>,
        cell_volumes: Vec<f64>,
        weight: &WeightSpec,
    ) -> Result<Self> {
        let len = cell_volumes.len();
        if len == 0 {
            return Err(Error::Construction("domain has no cells".into()));
        }
        if let WeightSpec::Samples(s) = weight {
            if s.len() != len {
                return Err(Error::Structural(format!("{} weight samples for {len} cells", s.len())));
            }
        }
        if cell_volumes.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Construction("cell volumes must be positive".into()));
        }
        let weights: Vec<f64> = (0..len).map(|i| weight.sample(i, &coords[i * dim..(i + 1) * dim])).collect();
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Construction("weight samples must be finite and nonnegative".into()));
        }
        let total_mass: f64 = weights.iter().zip(&cell_volumes).map(|(w, v)| w * v).sum();
        if !(total_mass.is_finite() && total_mass > 0.0) {
            return Err(Error::Construction(format!("total mass must be finite and positive, got {total_mass}")));
        }
        let dom = Self { id: fresh_id(), geometry, dim, coords, edges, cell_volumes, weights, total_mass };
        if let Some(expected) = dom.geometric_volume() {
            let got: f64 = dom.cell_volumes.iter().sum();
            if ((got - expected) / expected).abs() > 1e-6 {
                return Err(Error::Construction(format!("cell volumes sum to {got}, geometry has {expected}")));
            }
        }
        Ok(dom)
    }

    /// Same cells, different weight. The result is a distinct domain.
    pub fn reweighted(&self, weight: &WeightSpec) -> Result<Self> {
        Self::assemble(
            self.geometry.clone(),
            self.dim,
            self.coords.clone(),
            self.edges.clone(),
            self.cell_volumes.clone(),
            weight,
        )
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cell_volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_volumes.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// `|x_i|`, the distance of node `i` from the origin.
    pub fn radius_of(&self, i: usize) -> f64 {
        euclidean(self.node(i))
    }

    pub fn edges(&self) -> Option<&[f64]> {
        self.edges.as_deref()
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `v(Ω) = Σ v_i |cell_i|`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `v_i |cell_i|` for every cell.
    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().zip(&self.cell_volumes).map(|(w, v)| w * v)
    }

    /// Lebesgue volume of the underlying region, when the geometry knows it.
    pub fn geometric_volume(&self) -> Option<f64> {
        match &self.geometry {
            Geometry::Interval { a, b } => Some(b - a),
            Geometry::RadialBall { n, radius } => Some(unit_ball_volume(*n) * radius.powi(*n as i32)),
            Geometry::Box { axes } => Some(axes.iter().map(|a| a.hi - a.lo).product()),
            Geometry::Tabulated { .. } => None,
        }
    }

    fn coordinate_names(&self) -> Vec<String> {
        match self.geometry {
            Geometry::Interval { .. } => vec!["x".into()],
            Geometry::RadialBall { .. } => vec!["r".into()],
            _ => (0..self.dim).map(|k| format!("x{k}")).collect(),
        }
    }
}

/// `n_cells` uniform cells of `[a, b]`, as `n_cells + 1` edges.
pub fn uniform_edges(a: f64, b: f64, n_cells: usize) -> Vec<f64> {
    (0..=n_cells).map(|i| a + (b - a) * i as f64 / n_cells as f64).collect()
}

/// Radial edges `0, inner, ..., radius` that are geometric outside `inner`
/// with about `cells_per_e_fold` shells per factor `e` in radius.
pub fn graded_radial_edges(radius: f64, inner: f64, cells_per_e_fold: usize) -> Result<Vec<f64>> {
    if !(inner > 0.0 && inner < radius) || cells_per_e_fold == 0 {
        return Err(Error::Construction(format!("graded mesh needs 0 < inner < radius, got {inner}, {radius}")));
    }
    let span = (radius / inner).ln();
    let shells = (span * cells_per_e_fold as f64).ceil().max(1.0) as usize;
    let mut edges = Vec::with_capacity(shells + 2);
    edges.push(0.0);
    for k in 0..shells {
        edges.push(inner * (span * k as f64 / shells as f64).exp());
    }
    edges.push(radius);
    Ok(edges)
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::Construction("need at least two edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Construction("edges must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Nodal values on a [`WeightedDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain_id: u64,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(dom: &WeightedDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != dom.len() {
            return Err(Error::Structural(format!("{} values for {} nodes", values.len(), dom.len())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Construction(format!("field value {bad} is not finite")));
        }
        Ok(Self { domain_id: dom.id, values })
    }

    /// Samples `g` at every node.
    pub fn from_fn<F>(dom: &WeightedDomain, mut g: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let values = (0..dom.len()).map(|i| g(dom.node(i))).collect();
        Self::from_values(dom, values)
    }

    pub fn constant(dom: &WeightedDomain, c: f64) -> Self {
        Self { domain_id: dom.id, values: vec![c; dom.len()] }
    }

    pub fn zeros(dom: &WeightedDomain) -> Self {
        Self::constant(dom, 0.0)
    }

    /// `1` on cells whose centre satisfies `pred`, `0` elsewhere.
    pub fn indicator<F>(dom: &WeightedDomain, mut pred: F) -> Self
    where
        F: FnMut(&[f64]) -> bool,
    {
        let values = (0..dom.len()).map(|i| if pred(dom.node(i)) { 1.0 } else { 0.0 }).collect();
        Self { domain_id: dom.id, values }
    }

    pub fn domain_id(&self) -> u64 {
        self.domain_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_on(&self, dom: &WeightedDomain) -> Result<()> {
        if self.domain_id != dom.id || self.values.len() != dom.len() {
            return Err(Error::Structural("field does not live on this domain".into()));
        }
        Ok(())
    }

    pub fn same_domain(&self, other: &ScalarField) -> Result<()> {
        if self.domain_id != other.domain_id || self.values.len() != other.values.len() {
            return Err(Error::Structural("fields live on different domains".into()));
        }
        Ok(())
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Self {
        Self { domain_id: self.domain_id, values: self.values.iter().copied().map(f).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.same_domain(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { domain_id: self.domain_id, values })
    }

    /// Pointwise product.
    pub fn product(&self, other: &ScalarField) -> Result<Self> {
        self.same_domain(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(Self { domain_id: self.domain_id, values })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn abs_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn relabel(values: Vec<f64>, domain_id: u64) -> Self {
        Self { domain_id, values }
    }
}

/// `Σ g_i v_i |cell_i|`.
pub fn integrate(g: &ScalarField, dom: &WeightedDomain) -> Result<f64> {
    g.check_on(dom)?;
    Ok(g.values.iter().zip(dom.masses()).map(|(g, m)| g * m).sum())
}

/// `(∫ |g|^p v dx)^{1/p}`.
pub fn lp_norm(g: &ScalarField, p: f64, dom: &WeightedDomain) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    g.check_on(dom)?;
    let scale = g.abs_max();
    if scale == 0.0 {
        return Ok(0.0);
    }
    // Factor out the sup norm so that |g|^p cannot overflow.
    let s: f64 = g.values.iter().zip(dom.masses()).map(|(g, m)| (g.abs() / scale).powf(p) * m).sum();
    Ok(scale * s.powf(1.0 / p))
}

/// `v(S(r))` with `S(r) = {u > r}`.
pub fn level_set_measure(u: &ScalarField, r: f64, dom: &WeightedDomain) -> Result<f64> {
    u.check_on(dom)?;
    Ok(u.values.iter().zip(dom.masses()).filter(|(u, _)| **u > r).map(|(_, m)| m).sum())
}

/// A ball `B(center, radius)` used for weight averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Balls `B(center, radius·2^{-j})`, `j = 0..count`.
    pub fn dyadic(center: Vec<f64>, radius: f64, count: usize) -> Vec<Ball> {
        (0..count).map(|j| Ball::new(center.clone(), radius * 0.5f64.powi(j as i32))).collect()
    }
}

/// Lower bound for the Muckenhoupt `A_2` constant of `weight` over the
/// given balls: `max_B (avg_B v)(avg_B v^{-1})`, with cell-centre samples.
/// Returns `+∞` when the weight vanishes somewhere in a ball.
pub fn a2_constant_estimate(weight: &WeightSpec, dom: &WeightedDomain, balls: &[Ball]) -> Result<f64> {
    if balls.is_empty() {
        return Err(Error::domain("ball family is empty"));
    }
    let radial = matches!(dom.geometry, Geometry::RadialBall { .. });
    let sampled = dom.reweighted(weight)?;
    let mut best: f64 = 0.0;
    for ball in balls {
        if ball.center.len() != dom.dim {
            return Err(Error::Structural(format!("ball centre has {} coordinates", ball.center.len())));
        }
        if radial && ball.center[0] != 0.0 {
            return Err(Error::domain("radial domains only support balls centred at the origin"));
        }
        let (mut vol, mut v_int, mut inv_int) = (0.0, 0.0, 0.0);
        for i in 0..dom.len() {
            let d: f64 = dom.node(i).iter().zip(&ball.center).map(|(x, c)| (x - c) * (x - c)).sum::<f64>().sqrt();
            if d <= ball.radius {
                let w = sampled.weights[i];
                let cv = dom.cell_volumes[i];
                vol += cv;
                v_int += w * cv;
                inv_int += if w > 0.0 { cv / w } else { f64::INFINITY };
            }
        }
        if vol == 0.0 {
            return Err(Error::domain(format!("ball of radius {} contains no cell centre", ball.radius)));
        }
        best = best.max((v_int / vol) * (inv_int / vol));
    }
    Ok(best)
}

/// Writes the domain and any number of named fields as CSV:
/// coordinate columns, `cell_volume`, `weight`, then one column per field.
pub fn write_csv<W: Write>(mut out: W, dom: &WeightedDomain, fields: &[(&str, &ScalarField)]) -> Result<()> {
    for (_, f) in fields {
        f.check_on(dom)?;
    }
    let mut header = dom.coordinate_names();
    header.push("cell_volume".into());
    header.push("weight".into());
    header.extend(fields.iter().map(|(n, _)| n.to_string()));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..dom.len() {
        let mut row: Vec<String> = dom.node(i).iter().map(|x| x.to_string()).collect();
        row.push(dom.cell_volumes[i].to_string());
        row.push(dom.weights[i].to_string());
        row.extend(fields.iter().map(|(_, f)| f.values[i].to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a file produced by [`write_csv`] back into a tabulated domain and
/// its fields.
pub fn read_csv<R: BufRead>(input: R) -> Result<(WeightedDomain, Vec<(String, ScalarField)>)> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty CSV".into()))??;
    let names: Vec<String> = header.trim().split(',').map(|s| s.trim().to_string()).collect();
    let vol_col = names.iter().position(|n| n == "cell_volume");
    let w_col = names.iter().position(|n| n == "weight");
    let (vol_col, w_col) = match (vol_col, w_col) {
        (Some(v), Some(w)) if w == v + 1 && v > 0 => (v, w),
        _ => return Err(Error::Config("CSV needs coordinate columns, then cell_volume,weight".into())),
    };
    let dim = vol_col;
    let n_fields = names.len() - w_col - 1;
    let (mut coords, mut vols, mut weights) = (Vec::new(), Vec::new(), Vec::new());
    let mut columns = vec![Vec::new(); n_fields];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.trim().split(',').collect();
        if cells.len() != names.len() {
            return Err(Error::Config(format!("CSV row {} has {} columns, expected {}", lineno + 2, cells.len(), names.len())));
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Config(format!("CSV row {}: cannot parse {s:?}", lineno + 2)))
        };
        for c in &cells[..dim] {
            coords.push(parse(c)?);
        }
        vols.push(parse(cells[vol_col])?);
        weights.push(parse(cells[w_col])?);
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(parse(cells[w_col + 1 + k])?);
        }
    }
    let dom = WeightedDomain::tabulated(dim, coords, vols, weights)?;
    let fields = names[w_col + 1..]
        .iter()
        .cloned()
        .zip(columns)
        .map(|(n, vals)| ScalarField::from_values(&dom, vals).map(|f| (n, f)))
        .collect::<Result<Vec<_>>>()?;
    Ok((dom, fields))
}
