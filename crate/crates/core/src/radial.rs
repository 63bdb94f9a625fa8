//! Radial grids, quadrature, differentiation and norms.
//!
//! Functions on R^3 that depend only on |x| are represented by their profile
//! on (0, R_max]. Grids never place a node at r = 0; the origin value of an
//! integrand is synthesized by parity extrapolation, so 1/r factors stay
//! bounded everywhere we evaluate them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingKind {
    Uniform,
    LogUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

/// 1D quadrature/differentiation mesh on (0, R_max].
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    origin_weight: f64,
    spacing: SpacingKind,
    r_max: f64,
    /// Uniform step when spacing is uniform.
    step: Option<f64>,
}

pub const DEFAULT_N: usize = 2048;
pub const DEFAULT_R_MAX: f64 = 60.0;

/// Integral over [a, b] of the Lagrange interpolant through the nodes `t`,
/// returned as one weight per node. The Lagrange basis is integrated by
/// 4-point Gauss–Legendre (exact through degree 7, enough for up to eight
/// nodes), in coordinates centred on the panel so precision is kept.
fn panel_weights(t: &[f64], a: f64, b: f64) -> Vec<f64> {
    const GX: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const GW: [f64; 4] = [
        0.347_854_845_137_453_86,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_86,
    ];
    let c = (a + b) / 2.0;
    let half = (b - a) / 2.0;
    let s: Vec<f64> = t.iter().map(|&x| x - c).collect();
    let mut w = vec![0.0; t.len()];
    for (gx, gw) in GX.iter().zip(GW) {
        let x = half * gx;
        for j in 0..s.len() {
            let mut basis = 1.0;
            for k in 0..s.len() {
                if k != j {
                    basis *= (x - s[k]) / (s[j] - s[k]);
                }
            }
            w[j] += gw * half * basis;
        }
    }
    w
}

/// Quadrature weights on an equispaced extended node set: trapezoid with
/// Euler–Maclaurin end corrections through h⁴ (derivatives estimated by
/// one-sided 6-point stencils), giving O(h⁶) error for smooth integrands
/// while every weight stays positive.
fn uniform_weights(m: usize, h: f64) -> Vec<f64> {
    assert!(m >= 13);
    let mut w = vec![h; m];
    w[0] = h / 2.0;
    w[m - 1] = h / 2.0;
    let pts: Vec<f64> = (0..6).map(|i| i as f64 * h).collect();
    let fd1 = fd_weights(&pts, 0.0, 1);
    let fd3 = fd_weights(&pts, 0.0, 3);
    for j in 0..6 {
        let corr = h * h / 12.0 * fd1[j] - h.powi(4) / 720.0 * fd3[j];
        w[j] += corr;
        w[m - 1 - j] += corr;
    }
    w
}

/// Quadrature weights on an arbitrary increasing extended node set:
/// per-panel trapezoid, then a small multiplicative correction
/// w_i → w_i (1 + c₀ + c₁ r_i + c₂ r_i²) fitted so that 1, r and r² are
/// integrated exactly. The correction factors are O(h²) perturbations of
/// unity, so positivity is preserved.
fn graded_weights(ext: &[f64]) -> Vec<f64> {
    let m = ext.len();
    assert!(m >= 4);
    let mut w = vec![0.0; m];
    for k in 0..m - 1 {
        let half = (ext[k + 1] - ext[k]) / 2.0;
        w[k] += half;
        w[k + 1] += half;
    }
    let r_max = ext[m - 1];
    // Moments of the current rule against monomial targets.
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    let exact = [r_max, r_max * r_max / 2.0, r_max.powi(3) / 3.0];
    for (j, item) in exact.iter().enumerate() {
        let mut cur = 0.0;
        for i in 0..m {
            let rj = ext[i].powi(j as i32);
            cur += w[i] * rj;
            for (k, row) in a.iter_mut().enumerate() {
                row[j] += w[i] * rj * ext[i].powi(k as i32);
            }
        }
        rhs[j] = item - cur;
    }
    // Solve the 3×3 system a c = rhs by Gaussian elimination with pivoting.
    let mut c = [0.0; 3];
    let mut mat = [
        [a[0][0], a[1][0], a[2][0], rhs[0]],
        [a[0][1], a[1][1], a[2][1], rhs[1]],
        [a[0][2], a[1][2], a[2][2], rhs[2]],
    ];
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))
            .unwrap();
        mat.swap(col, piv);
        for row in col + 1..3 {
            let f = mat[row][col] / mat[col][col];
            for k in col..4 {
                mat[row][k] -= f * mat[col][k];
            }
        }
    }
    for col in (0..3).rev() {
        let mut s = mat[col][3];
        for k in col + 1..3 {
            s -= mat[col][k] * c[k];
        }
        c[col] = s / mat[col][col];
    }
    for i in 0..m {
        w[i] *= 1.0 + c[0] + c[1] * ext[i] + c[2] * ext[i] * ext[i];
    }
    w
}

impl RadialGrid {
    /// Builds a grid with `n` nodes on (0, r_max].
    pub fn build(n: usize, r_max: f64, kind: SpacingKind) -> Result<Arc<RadialGrid>> {
        if n < 64 {
            return Err(Error::Config(format!("need n >= 64, got {n}")));
        }
        if !(r_max > 0.0) {
            return Err(Error::Config(format!("need r_max > 0, got {r_max}")));
        }
        let nodes: Vec<f64> = match kind {
            SpacingKind::Uniform => {
                let h = r_max / n as f64;
                (1..=n).map(|i| i as f64 * h).collect()
            }
            SpacingKind::LogUniform => {
                // First node at r_max/n, geometric growth to r_max.
                let r1 = r_max / n as f64;
                let rho = (r_max / r1).powf(1.0 / (n as f64 - 1.0));
                let mut v: Vec<f64> = (0..n).map(|i| r1 * rho.powi(i as i32)).collect();
                v[n - 1] = r_max;
                v
            }
        };
        let mut ext = Vec::with_capacity(n + 1);
        ext.push(0.0);
        ext.extend_from_slice(&nodes);
        let w_ext = match kind {
            SpacingKind::Uniform => uniform_weights(n + 1, r_max / n as f64),
            SpacingKind::LogUniform => graded_weights(&ext),
        };
        debug_assert!(w_ext.iter().all(|&w| w > 0.0));
        let step = match kind {
            SpacingKind::Uniform => Some(r_max / n as f64),
            SpacingKind::LogUniform => None,
        };
        Ok(Arc::new(RadialGrid {
            origin_weight: w_ext[0],
            weights: w_ext[1..].to_vec(),
            nodes,
            spacing: kind,
            r_max,
            step,
        }))
    }

    pub fn default_grid() -> Arc<RadialGrid> {
        RadialGrid::build(DEFAULT_N, DEFAULT_R_MAX, SpacingKind::Uniform).expect("default grid")
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn origin_weight(&self) -> f64 {
        self.origin_weight
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn spacing(&self) -> SpacingKind {
        self.spacing
    }
    /// Uniform step, if the grid is uniform.
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    /// ∫_0^{R_max} g dr from nodal values plus the synthesized origin value.
    pub fn integrate_values(&self, g: &[f64], g_origin: f64) -> f64 {
        assert_eq!(g.len(), self.nodes.len());
        let mut acc = self.origin_weight * g_origin;
        for (w, v) in self.weights.iter().zip(g) {
            acc += w * v;
        }
        acc
    }

    /// Cumulative integral c_i = ∫_0^{r_i} g dr at every node.
    ///
    /// Per-panel rules aligned to the node boundaries, so integrands with
    /// kinks at nodes are never straddled. Uniform grids interpolate through
    /// a sliding 6-node window (O(h⁶)); graded grids use the 3-node window
    /// closest to the panel, skipping the origin node whose spacing to its
    /// neighbours is wildly uneven.
    pub fn cumulative_integral(&self, g: &[f64], g_origin: f64) -> Vec<f64> {
        let n = self.nodes.len();
        assert_eq!(g.len(), n);
        let mut ext_t = Vec::with_capacity(n + 1);
        ext_t.push(0.0);
        ext_t.extend_from_slice(&self.nodes);
        let mut ext_v = Vec::with_capacity(n + 1);
        ext_v.push(g_origin);
        ext_v.extend_from_slice(g);
        let width = match self.spacing {
            SpacingKind::Uniform => 6usize.min(n + 1),
            SpacingKind::LogUniform => 3,
        };
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        match self.spacing {
            SpacingKind::Uniform => {
                // Weights depend only on the panel's offset inside its
                // window (translation/scale invariance of the interpolant),
                // so at most `width` distinct stencils occur.
                let h = self.step.expect("uniform grid has a step");
                let mut cache: Vec<Option<Vec<f64>>> = vec![None; width];
                let unit: Vec<f64> = (0..width).map(|j| j as f64).collect();
                for k in 0..n {
                    let start = k.saturating_sub(width / 2).min(n + 1 - width);
                    let off = k - start;
                    let pw = cache[off].get_or_insert_with(|| {
                        panel_weights(&unit, off as f64, off as f64 + 1.0)
                    });
                    let panel: f64 = pw
                        .iter()
                        .zip(&ext_v[start..start + width])
                        .map(|(&w, &v)| w * v)
                        .sum();
                    acc += h * panel;
                    out[k] = acc;
                }
            }
            SpacingKind::LogUniform => {
                for k in 0..n {
                    let (a, b) = (ext_t[k], ext_t[k + 1]);
                    // First log panel [0, r1] may only use nodes {0, r1, r2}:
                    // the quadratic there is an interpolation on the panel,
                    // which is benign; wider windows are not.
                    let start = if k == 0 {
                        0
                    } else {
                        k.saturating_sub(1).min(n + 1 - width)
                    };
                    let pw = panel_weights(&ext_t[start..start + width], a, b);
                    let panel: f64 = pw
                        .iter()
                        .zip(&ext_v[start..start + width])
                        .map(|(&w, &v)| w * v)
                        .sum();
                    acc += panel;
                    out[k] = acc;
                }
            }
        }
        out
    }
}

/// Sampled radial profile χ(r) with attached grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    parity: Parity,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, parity: Parity) -> Result<RadialField> {
        if values.len() != grid.n() {
            return Err(Error::Config(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("field contains non-finite values".into()));
        }
        Ok(RadialField { grid, values, parity })
    }

    pub fn sample<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, parity: Parity, f: F) -> RadialField {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField::new(grid.clone(), values, parity).expect("sampled field")
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> RadialField {
        RadialField {
            grid: grid.clone(),
            values: vec![0.0; grid.n()],
            parity: Parity::Even,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Value at r = 0 by parity extrapolation: quadratic in r^2 for even
    /// fields, zero for odd ones.
    pub fn origin_value(&self) -> f64 {
        match self.parity {
            Parity::Odd => 0.0,
            Parity::Even => {
                let r = self.grid.nodes();
                let (r1, r2) = (r[0], r[1]);
                let (f1, f2) = (self.values[0], self.values[1]);
                (f1 * r2 * r2 - f2 * r1 * r1) / (r2 * r2 - r1 * r1)
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Domain-truncation check: |χ(R_max)| ≤ 1e-6 max|χ|.
    pub fn tail_is_negligible(&self) -> bool {
        let m = self.max_abs();
        m == 0.0 || self.values[self.values.len() - 1].abs() <= 1e-6 * m
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            parity: self.parity,
        }
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &RadialField, f: F) -> RadialField {
        assert_eq!(self.values.len(), other.values.len());
        RadialField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            parity: self.parity,
        }
    }

    pub fn scaled(&self, c: f64) -> RadialField {
        self.map(|v| c * v)
    }

    /// Writes `r,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }

    pub fn to_envelope(&self) -> FieldEnvelope {
        FieldEnvelope {
            grid: GridMeta {
                n: self.grid.n(),
                r_max: self.grid.r_max(),
                spacing: self.grid.spacing(),
            },
            parity: self.parity,
            values: self.values.clone(),
        }
    }

    pub fn from_envelope(envelope: &FieldEnvelope) -> Result<RadialField> {
        let grid = RadialGrid::build(envelope.grid.n, envelope.grid.r_max, envelope.grid.spacing)?;
        RadialField::new(grid, envelope.values.clone(), envelope.parity)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub r_max: f64,
    pub spacing: SpacingKind,
}

/// JSON envelope carrying grid metadata next to the samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldEnvelope {
    pub grid: GridMeta,
    pub parity: Parity,
    pub values: Vec<f64>,
}

/// ∫_0^{R_max} f(r) r^moment dr. Callers attach geometric factors such as 4π.
pub fn integrate_radial(f: &RadialField, moment: u32) -> f64 {
    assert!(moment <= 2, "moment must be 0, 1 or 2");
    let g: Vec<f64> = f
        .grid()
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(&r, &v)| v * r.powi(moment as i32))
        .collect();
    let g0 = if moment == 0 { f.origin_value() } else { 0.0 };
    f.grid().integrate_values(&g, g0)
}

/// Fornberg finite-difference weights for derivative `m` at `x0` on `x`.
fn fd_weights(x: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = ((x[i] - x0) * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = (x[i] - x0) * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[m].clone()
}

/// Finite-difference derivative of the given order (1 or 2).
///
/// Uniform grids use 5-point stencils (shifted near the boundary); non-uniform
/// grids fall back to 3-point stencils.
pub fn differentiate(f: &RadialField, order: usize) -> RadialField {
    assert!(order == 1 || order == 2);
    let grid = f.grid();
    let n = grid.n();
    let r = grid.nodes();
    let v = f.values();
    let stencil = match grid.spacing() {
        SpacingKind::Uniform => 5.min(n),
        SpacingKind::LogUniform => 3.min(n),
    };
    let half = stencil / 2;
    let mut out = vec![0.0; n];
    match grid.spacing() {
        SpacingKind::Uniform => {
            // On a uniform grid the stencil weights depend only on the
            // node's offset inside its window; cache the few patterns.
            let h = grid.step().expect("uniform grid has a step");
            let scale = h.powi(-(order as i32));
            let mut cache: Vec<Option<Vec<f64>>> = vec![None; stencil];
            let unit: Vec<f64> = (0..stencil).map(|j| j as f64).collect();
            for i in 0..n {
                let start = i.saturating_sub(half).min(n - stencil);
                let off = i - start;
                let w = cache[off].get_or_insert_with(|| fd_weights(&unit, off as f64, order));
                out[i] = w
                    .iter()
                    .zip(&v[start..start + stencil])
                    .map(|(&wi, &vi)| wi * vi)
                    .sum::<f64>()
                    * scale;
            }
        }
        SpacingKind::LogUniform => {
            for i in 0..n {
                let start = i.saturating_sub(half).min(n - stencil);
                let xs = &r[start..start + stencil];
                let w = fd_weights(xs, r[i], order);
                out[i] = w
                    .iter()
                    .zip(&v[start..start + stencil])
                    .map(|(&wi, &vi)| wi * vi)
                    .sum();
            }
        }
    }
    let parity = match (f.parity(), order) {
        (Parity::Even, 1) | (Parity::Odd, 2) => Parity::Odd,
        _ => Parity::Even,
    };
    RadialField {
        grid: grid.clone(),
        values: out,
        parity,
    }
}

/// (‖χ‖²_{L²(R³)}, ‖∇χ‖²_{L²(R³)}) for a radial profile:
/// 4π∫ f² r² dr and 4π∫ (f')² r² dr.
pub fn norms(f: &RadialField) -> (f64, f64) {
    let sq = f.map(|v| v * v);
    let l2_sq = FOUR_PI * integrate_radial(&sq, 2);
    let df = differentiate(f, 1);
    let dsq = df.map(|v| v * v);
    let h1dot_sq = FOUR_PI * integrate_radial(&dsq, 2);
    (l2_sq, h1dot_sq)
}

/// Discrete L² inner product 4π∫ f g r² dr.
pub fn inner_l2(f: &RadialField, g: &RadialField) -> f64 {
    let p = f.zip_with(g, |a, b| a * b);
    FOUR_PI * integrate_radial(&p, 2)
}

/// Relative L² distance ‖f−g‖ / max(‖f‖, ‖g‖).
pub fn rel_l2_distance(f: &RadialField, g: &RadialField) -> f64 {
    let d = f.zip_with(g, |a, b| a - b);
    let nd = inner_l2(&d, &d).sqrt();
    let nf = inner_l2(f, f).sqrt();
    let ng = inner_l2(g, g).sqrt();
    let scale = nf.max(ng);
    if scale == 0.0 {
        0.0
    } else {
        nd / scale
    }
}
