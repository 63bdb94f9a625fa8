//! Coulomb quadratic/bilinear forms, the Hartree potential via Newton's
//! theorem, and the energy/action functionals.
//!
//! For radial densities the Coulomb kernel reduces to 1/max(r,s), so every
//! nonlocal quantity here is a 1D integral. The bilinear form is evaluated
//! through the cumulative charge C(t) = ∫_0^t f(r) r² dr:
//!
//!   A(f,g) = 16π² [ ∫_0^R C_f(t) C_g(t) / t² dt + C_f(R) C_g(R) / R ],
//!
//! which is exactly the 1/max(r,s) double integral for densities supported in
//! the ball of radius R, and is manifestly symmetric and positive
//! semdefinite.

use crate::error::{Error, Result};
use crate::radial::{differentiate, integrate_radial, norms, RadialField, FOUR_PI};
use serde::{Deserialize, Serialize};

/// All scalar functionals of a profile at a given ω, in one record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub omega: f64,
    pub l2_sq: f64,
    pub h1dot_sq: f64,
    /// ∫ |χ|²/|x| dx = 4π ∫ χ² r dr.
    pub coulomb_attraction: f64,
    /// A(χ²) — the repulsive pair interaction.
    pub a_quad: f64,
    /// L_ω(χ) = ‖∇χ‖² − ∫|χ|²/|x| + ω‖χ‖².
    pub l_omega: f64,
    pub energy: f64,
    pub action: f64,
}

impl FunctionalReport {
    pub fn csv_header() -> &'static str {
        "omega,l2_sq,h1dot_sq,coulomb_attraction,a_quad,l_omega,energy,action"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.omega,
            self.l2_sq,
            self.h1dot_sq,
            self.coulomb_attraction,
            self.a_quad,
            self.l_omega,
            self.energy,
            self.action
        )
    }
}

/// Cumulative moments of a density: C2(t) = ∫_0^t f r² dr and
/// T1(t) = ∫_0^t f r dr at every node.
fn cumulative_moments(density: &RadialField) -> (Vec<f64>, Vec<f64>) {
    let grid = density.grid();
    let r = grid.nodes();
    let v = density.values();
    let g2: Vec<f64> = r.iter().zip(v).map(|(&r, &f)| f * r * r).collect();
    let g1: Vec<f64> = r.iter().zip(v).map(|(&r, &f)| f * r).collect();
    (grid.cumulative_integral(&g2, 0.0), grid.cumulative_integral(&g1, 0.0))
}

/// Hartree potential of the density χ²:
/// Φ(r) = 4π [ (1/r) ∫_0^r χ² s² ds + ∫_r^R χ² s ds ].
pub fn hartree_potential(chi: &RadialField) -> RadialField {
    let density = chi.map(|v| v * v);
    let (c2, t1) = cumulative_moments(&density);
    let t1_full = t1[t1.len() - 1];
    let grid = chi.grid();
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| FOUR_PI * (c2[i] / r + (t1_full - t1[i])))
        .collect();
    RadialField::new(grid.clone(), values, crate::radial::Parity::Even).expect("hartree potential")
}

/// Coulomb bilinear form A(f,g) = ∫∫ f(x)g(y)/|x−y| for radial densities.
/// Callers pass densities (for the quadratic form on a profile χ, pass χ²).
pub fn a_form(f: &RadialField, g: &RadialField) -> f64 {
    assert!(std::sync::Arc::ptr_eq(f.grid(), g.grid()) || f.grid().n() == g.grid().n());
    let grid = f.grid();
    let (c2f, _) = cumulative_moments(f);
    let (c2g, _) = cumulative_moments(g);
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| c2f[i] * c2g[i] / (t * t))
        .collect();
    let bulk = grid.integrate_values(&integrand, 0.0);
    let n = grid.n();
    let tail = c2f[n - 1] * c2g[n - 1] / grid.r_max();
    16.0 * std::f64::consts::PI * std::f64::consts::PI * (bulk + tail)
}

/// ‖f‖²_{Ḣ⁻¹} = A(f,f)/(4π).
pub fn hminus1_norm_sq(f: &RadialField) -> f64 {
    a_form(f, f) / FOUR_PI
}

/// All functionals of χ at ω. energy = action − (ω/2)‖χ‖².
pub fn report(chi: &RadialField, omega: f64) -> FunctionalReport {
    let (l2_sq, h1dot_sq) = norms(chi);
    let sq = chi.map(|v| v * v);
    let coulomb_attraction = FOUR_PI * integrate_radial(&sq, 1);
    let a_quad = a_form(&sq, &sq);
    let l_omega = h1dot_sq - coulomb_attraction + omega * l2_sq;
    let action = 0.5 * l_omega + 0.25 * a_quad;
    let energy = action - 0.5 * omega * l2_sq;
    FunctionalReport {
        omega,
        l2_sq,
        h1dot_sq,
        coulomb_attraction,
        a_quad,
        l_omega,
        energy,
        action,
    }
}

/// L_ω quadratic form on a profile (not a density).
pub fn l_omega(chi: &RadialField, omega: f64) -> f64 {
    let (l2_sq, h1dot_sq) = norms(chi);
    let sq = chi.map(|v| v * v);
    let coulomb = FOUR_PI * integrate_radial(&sq, 1);
    h1dot_sq - coulomb + omega * l2_sq
}

/// Action S_ω(χ) = ½L_ω(χ) + ¼A(χ²).
pub fn action(chi: &RadialField, omega: f64) -> f64 {
    report(chi, omega).action
}

/// Diagnostic ratio (∫|χ|³)^{1/3} / (‖χ‖_{Ḣ¹}^{1/3} ‖χ²‖_{Ḣ⁻¹}^{1/3}).
pub fn sobolev_ratio_probe(chi: &RadialField) -> Result<f64> {
    if chi.max_abs() == 0.0 {
        return Err(Error::Precondition("sobolev_ratio_probe needs a nonzero field".into()));
    }
    let cube = chi.map(|v| v.abs().powi(3));
    let l3 = (FOUR_PI * integrate_radial(&cube, 2)).powf(1.0 / 3.0);
    let (_, h1dot_sq) = norms(chi);
    let sq = chi.map(|v| v * v);
    let hm1 = hminus1_norm_sq(&sq);
    Ok(l3 / (h1dot_sq.sqrt().powf(1.0 / 3.0) * hm1.sqrt().powf(1.0 / 3.0)))
}

/// First variation of S_ω as a field: (−Δ − 1/r + ω + Φ_χ)χ, evaluated with
/// finite differences in the reduced variable u = rχ (so Δχ = u''/r).
pub fn euler_lagrange_residual_field(chi: &RadialField, omega: f64) -> RadialField {
    let grid = chi.grid();
    let u = RadialField::new(
        grid.clone(),
        grid.nodes()
            .iter()
            .zip(chi.values())
            .map(|(&r, &c)| r * c)
            .collect(),
        crate::radial::Parity::Odd,
    )
    .expect("reduced field");
    let upp = differentiate(&u, 2);
    let phi = hartree_potential(chi);
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            -upp.values()[i] / r - chi.values()[i] / r + (omega + phi.values()[i]) * chi.values()[i]
        })
        .collect();
    RadialField::new(grid.clone(), values, chi.parity()).expect("EL residual")
}
