//! Numerical certification of the operator-theoretic estimates the solver
//! rests on: sector angles with their sup-bounds, imaginary-power growth
//! `||T^{ir}|| <= C e^{θ|r|}`, the Fourier transform of `e^{|x|T}`, shifted
//! operator angles, integrability of the multiplier family `B_ξ^{ir}`, the
//! elementary angle inequalities, and the dominant-term reduction of the
//! resolvent representation.
//!
//! Every verdict is a pure function of the sampled values and the declared
//! tolerance; sampling loops are parallel but reductions are fixed-order, so
//! reports are byte-identical across runs for a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{imaginary_power_auto, principal_power, semigroup_exp, OperatorHandle};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::matrix::{op_norm_2, spectral_apply, C64, ComplexMatrix, LinearSolver};
use crate::operators::{b_xi_symbol, BcKind, ModelParams, MuShift};
use crate::resolvent::{kernel_j, resolvent_apply};

/// One sampled scalar quantity at a (possibly complex) coordinate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sample {
    pub coord_re: f64,
    pub coord_im: f64,
    pub value: f64,
}

impl Sample {
    pub fn real(x: f64, value: f64) -> Self {
        Self { coord_re: x, coord_im: 0.0, value }
    }
}

/// A fitted line/exponent with its residual on the fitted points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fit {
    pub c: f64,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Certification record: sampled quantities, the fit, and the verdict
/// against the declared tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CertReport {
    pub quantity: String,
    pub samples: Vec<Sample>,
    pub fit: Option<Fit>,
    pub verdict: Verdict,
    pub criterion: String,
    pub metadata: serde_json::Value,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let l0 = lo.ln();
    let l1 = hi.ln();
    (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// `||λ (T - λI)^{-1}||`, with divergence reported as infinity rather than
/// an error (the sampling estimators keep going).
pub fn scaled_resolvent_norm(t: &OperatorHandle, lambda: C64) -> f64 {
    match t.resolvent(lambda) {
        Ok(res) => lambda.norm() * op_norm_2(&res),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleProbe {
    pub angle: f64,
    pub sup: f64,
    pub sup_plus_ray: f64,
    pub sup_minus_ray: f64,
    /// sup moved by less than 1% when the largest radius doubled
    pub stable: bool,
}

/// Sampled sector-angle estimate: for each probe angle the sup of
/// `||λ(T - λ)^{-1}||` over both rays, and the smallest probe angle whose
/// sup is stable under doubling the radius range and within 10x the best.
#[derive(Debug, Clone, Serialize)]
pub struct SectorAngleReport {
    pub probes: Vec<AngleProbe>,
    pub estimated_angle: Option<f64>,
}

pub fn estimate_sector_angle(
    t: &OperatorHandle,
    probe_angles: &[f64],
    probe_radii: &[f64],
) -> Result<SectorAngleReport> {
    if probe_radii.len() < 2 {
        return Err(Error::Validation("need at least two probe radii".into()));
    }
    let r_min = probe_radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let r_max = probe_radii.iter().cloned().fold(0.0f64, f64::max);
    if r_max / r_min < 1e5 {
        return Err(Error::Validation(format!(
            "probe radii must span at least 5 decades, got {:.1}",
            (r_max / r_min).log10()
        )));
    }
    let mut probes = Vec::new();
    for &angle in probe_angles {
        if !(angle > 0.0 && angle < std::f64::consts::PI) {
            continue;
        }
        let ray_sup = |sign: f64, radii: &[f64]| -> f64 {
            let vals: Vec<f64> = radii
                .par_iter()
                .map(|&rho| scaled_resolvent_norm(t, C64::from_polar(rho, sign * angle)))
                .collect();
            vals.into_iter().fold(0.0, f64::max)
        };
        let sup_plus = ray_sup(1.0, probe_radii);
        let sup_minus = ray_sup(-1.0, probe_radii);
        let sup = sup_plus.max(sup_minus);
        let doubled = [2.0 * r_max];
        let sup_doubled = ray_sup(1.0, &doubled).max(ray_sup(-1.0, &doubled));
        let stable = sup.is_finite() && (sup_doubled - sup).max(0.0) < 0.01 * sup;
        probes.push(AngleProbe {
            angle,
            sup,
            sup_plus_ray: sup_plus,
            sup_minus_ray: sup_minus,
            stable,
        });
    }
    probes.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap());
    let best = probes
        .iter()
        .filter(|p| p.stable)
        .map(|p| p.sup)
        .fold(f64::INFINITY, f64::min);
    let estimated_angle = probes
        .iter()
        .find(|p| p.stable && p.sup <= 10.0 * best)
        .map(|p| p.angle);
    Ok(SectorAngleReport { probes, estimated_angle })
}

impl SectorAngleReport {
    pub fn report(&self, quantity: &str, angle_tol: f64) -> CertReport {
        let pass = self.estimated_angle.map(|a| a <= angle_tol).unwrap_or(false);
        CertReport {
            quantity: quantity.into(),
            samples: self
                .probes
                .iter()
                .map(|p| Sample::real(p.angle, p.sup))
                .collect(),
            fit: None,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: format!("estimated sector angle <= {angle_tol}"),
            metadata: serde_json::json!({ "estimated_angle": self.estimated_angle }),
        }
    }
}

/// Which path computes the imaginary powers for the growth fit.
#[derive(Debug, Clone, Copy)]
pub enum PowerRoute {
    /// Dunford-Riesz contour quadrature (the route under test).
    Contour { rel_tol: f64 },
    /// Eigen-oracle `V Λ^{ir} V^{-1}` (for operators the contour cannot
    /// reach cheaply, e.g. the direct fourth-order matrices).
    SpectralOracle,
}

/// `||T^{ir}||` on an `r`-grid with the envelope fit
/// `log ||T^{ir}|| <= log C + θ |r|`.
#[derive(Debug, Clone, Serialize)]
pub struct BipGrowthReport {
    pub norms: Vec<(f64, f64)>,
    pub c_hat: f64,
    pub theta_hat: f64,
    pub fit_residual: f64,
}

/// Least squares through the upper convex envelope of `(x, y)`; the BIP
/// bound is a sup bound, so fitting all points would under-report θ.
fn envelope_fit(points: &[(f64, f64)]) -> Fit {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // collapse duplicate abscissae to their max
    let mut collapsed: Vec<(f64, f64)> = Vec::new();
    for (x, y) in pts {
        match collapsed.last_mut() {
            Some(last) if (last.0 - x).abs() < 1e-14 => last.1 = last.1.max(y),
            _ => collapsed.push((x, y)),
        }
    }
    // upper convex hull, left to right
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in collapsed {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let n = hull.len() as f64;
    let sx: f64 = hull.iter().map(|p| p.0).sum();
    let sy: f64 = hull.iter().map(|p| p.1).sum();
    let sxx: f64 = hull.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = hull.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let (slope, intercept) = if denom.abs() < 1e-300 || hull.len() < 2 {
        (0.0, sy / n)
    } else {
        let slope = (n * sxy - sx * sy) / denom;
        (slope, (sy - slope * sx) / n)
    };
    let residual = hull
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).abs())
        .fold(0.0, f64::max);
    Fit {
        c: intercept.exp(),
        slope,
        residual,
    }
}

pub fn estimate_bip_growth(
    t: &OperatorHandle,
    r_grid: &[f64],
    route: PowerRoute,
) -> Result<BipGrowthReport> {
    if r_grid.iter().any(|r| r.abs() > 20.0) {
        return Err(Error::Validation("imaginary-power grid restricted to |r| <= 20".into()));
    }
    if t.zero_resolvent_radius <= 0.0 {
        return Err(Error::HypothesisViolation("0 in the spectrum: imaginary powers undefined".into()));
    }
    let mut norms = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let power = match route {
            PowerRoute::Contour { rel_tol } => imaginary_power_auto(t, r, rel_tol)?,
            PowerRoute::SpectralOracle => {
                spectral_apply(t.matrix(), |z| (z.ln() * C64::new(0.0, r)).exp())?
            }
        };
        norms.push((r, op_norm_2(&power)));
    }
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .map(|(r, nrm)| (r.abs(), nrm.max(1e-300).ln()))
        .collect();
    let fit = envelope_fit(&pts);
    Ok(BipGrowthReport {
        norms,
        c_hat: fit.c,
        theta_hat: fit.slope,
        fit_residual: fit.residual,
    })
}

impl BipGrowthReport {
    pub fn report(&self, quantity: &str, theta_tol: f64) -> CertReport {
        let pass = self.theta_hat <= theta_tol;
        CertReport {
            quantity: quantity.into(),
            samples: self
                .norms
                .iter()
                .map(|(r, v)| Sample::real(*r, *v))
                .collect(),
            fit: Some(Fit {
                c: self.c_hat,
                slope: self.theta_hat,
                residual: self.fit_residual,
            }),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: format!("fitted theta <= {theta_tol}"),
            metadata: serde_json::json!({ "c_hat": self.c_hat, "theta_hat": self.theta_hat }),
        }
    }
}

/// Quadrature check of `F(e^{|x|T})(ξ) = -2T (T² + 4π²ξ² I)^{-1}`.
#[derive(Debug, Clone, Serialize)]
pub struct FourierLemmaReport {
    pub per_xi: Vec<(f64, f64)>,
    pub sup_rel_error: f64,
    /// analytic bound on the dropped `|x| > X` tail: `2 e^{-βX} / β`
    pub tail_bound: f64,
    pub truncation_x: f64,
}

pub fn verify_fourier_lemma(
    t: &OperatorHandle,
    xi_grid: &[f64],
    truncation_x: Option<f64>,
) -> Result<FourierLemmaReport> {
    let beta = -t.spectral_bound();
    if beta <= 0.0 {
        return Err(Error::UnstableGenerator {
            spectral_bound: t.spectral_bound(),
        });
    }
    let x_max = truncation_x.unwrap_or(40.0 / beta);
    let norm_t = op_norm_2(t.matrix());
    let m = t.dim();

    let mut per_xi = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        // right side: -2T (T² + 4π²ξ²)^{-1}
        let t2_shifted = t
            .matrix()
            .matmul(t.matrix())
            .shift(C64::new(4.0 * std::f64::consts::PI.powi(2) * xi * xi, 0.0));
        let rhs = LinearSolver::new(&t2_shifted)?
            .solve_matrix(&t.matrix().scale(C64::new(-2.0, 0.0)))?;
        let rhs_norm = op_norm_2(&rhs);

        // left side: 2 ∫_0^X e^{xT} cos(2πξ x) dx, trapezoid with the step
        // graded by the decay e^{-βx} of the integrand
        let tol_abs = 1e-8 * rhs_norm.max(1.0);
        let freq = norm_t + 2.0 * std::f64::consts::PI * xi.abs() + 1.0;
        let h0 = (12.0 * tol_abs / (x_max * freq * freq)).sqrt();
        let panel_len = (1.0 / beta).min(x_max);
        let mut acc = ComplexMatrix::zeros(m);
        let mut carry = ComplexMatrix::identity(m); // e^{x_panel_start T}
        let mut x0 = 0.0;
        while x0 < x_max - 1e-12 {
            let x1 = (x0 + panel_len).min(x_max);
            let len = x1 - x0;
            let h_here = (h0 * (beta * x0 / 2.0).exp()).min(len);
            let steps = (len / h_here).ceil().max(1.0) as usize;
            let h = len / steps as f64;
            let e_h = crate::contour::expm(&t.matrix().scale(C64::new(h, 0.0)))?;
            let mut point = carry.clone();
            for s in 0..=steps {
                let x = x0 + s as f64 * h;
                let w = if s == 0 || s == steps { 0.5 * h } else { h };
                let weight = 2.0 * w * (2.0 * std::f64::consts::PI * xi * x).cos();
                acc.axpy(C64::new(weight, 0.0), &point);
                if s < steps {
                    point = e_h.matmul(&point);
                }
            }
            carry = point;
            x0 = x1;
        }
        let rel = op_norm_2(&acc.sub(&rhs)) / rhs_norm.max(1e-300);
        per_xi.push((xi, rel));
    }
    let sup_rel_error = per_xi.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Ok(FourierLemmaReport {
        per_xi,
        sup_rel_error,
        tail_bound: 2.0 * (-beta * x_max).exp() / beta,
        truncation_x: x_max,
    })
}

impl FourierLemmaReport {
    pub fn report(&self, quantity: &str, tol: f64) -> CertReport {
        let pass = self.sup_rel_error <= tol;
        CertReport {
            quantity: quantity.into(),
            samples: self.per_xi.iter().map(|(x, e)| Sample::real(*x, *e)).collect(),
            fit: None,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: format!("sup relative error <= {tol}"),
            metadata: serde_json::json!({
                "tail_bound": self.tail_bound,
                "truncation_x": self.truncation_x
            }),
        }
    }
}

/// Angle and semigroup checks for the shift family `T + zI` and its
/// fractional power.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftedOpsReport {
    pub angle_shifted: Option<f64>,
    pub angle_shifted_bound: f64,
    pub angle_power: Option<f64>,
    pub angle_power_bound: f64,
    pub zero_in_resolvent: bool,
    /// `sup_λ ||T_λ^k e^{t T_λ}||` over the sampled ray family, per (k, t)
    pub family_sups: Vec<((usize, f64), f64)>,
    /// same sup after doubling the family sampling
    pub family_sups_refined: Vec<((usize, f64), f64)>,
}

fn default_probe_angles() -> Vec<f64> {
    vec![
        0.01,
        0.02,
        0.05,
        0.1,
        0.2,
        std::f64::consts::PI / 6.0,
        std::f64::consts::PI / 4.0,
        std::f64::consts::PI / 3.0,
        std::f64::consts::PI / 2.0,
        2.0 * std::f64::consts::PI / 3.0,
        3.0 * std::f64::consts::PI / 4.0,
    ]
}

pub fn verify_shifted_operators(t: &OperatorHandle, z: C64, alpha: f64) -> Result<ShiftedOpsReport> {
    let omega = t.claimed_angle;
    if z.arg().abs() + omega >= std::f64::consts::PI {
        return Err(Error::HypothesisViolation(format!(
            "|arg z| + omega = {} >= pi",
            z.arg().abs() + omega
        )));
    }
    let max_angle = omega.max(std::f64::consts::PI - omega);
    if !(alpha > 0.0 && alpha < std::f64::consts::PI / (2.0 * max_angle)) {
        return Err(Error::HypothesisViolation(format!(
            "alpha = {alpha} outside (0, pi / (2 max(omega, pi - omega)))"
        )));
    }

    let shifted = OperatorHandle::from_parts(
        t.matrix().shift(z),
        t.spectrum().iter().map(|ev| ev + z).collect(),
        false,
        None,
    );
    let scale = shifted.max_modulus().max(1.0);
    let radii = logspace(1e-3 * scale, 1e3 * scale, 36);
    let probe_angles = default_probe_angles();
    let angle_shifted = estimate_sector_angle(&shifted, &probe_angles, &radii)?.estimated_angle;

    let power_matrix = spectral_apply(shifted.matrix(), |lam| principal_power(lam, C64::new(alpha, 0.0)))?;
    let power_handle = OperatorHandle::new_auto(power_matrix)?;
    let pscale = power_handle.max_modulus().max(1.0);
    let pradii = logspace(1e-3 * pscale, 1e3 * pscale, 36);
    let angle_power = estimate_sector_angle(&power_handle, &probe_angles, &pradii)?.estimated_angle;

    // uniform boundedness of T_λ^k e^{t T_λ} with T_λ = -(T + λI)^α over a
    // ray family through arg λ = ±arg z
    let family_values = |count: usize, span: f64| -> Result<Vec<((usize, f64), f64)>> {
        let rho_grid = logspace(0.05 * scale, span * scale, count);
        let mut out = Vec::new();
        for k in [1usize, 2] {
            for t_time in [0.1, 1.0] {
                let mut sup = 0.0f64;
                for &rho in &rho_grid {
                    for sign in [-1.0, 1.0] {
                        let lam = C64::from_polar(rho, sign * z.arg());
                        let generator = spectral_apply(&t.matrix().shift(lam), |w| {
                            -principal_power(w, C64::new(alpha, 0.0))
                        })?;
                        let gen_handle = OperatorHandle::new_auto(generator)?;
                        let sg = semigroup_exp(&gen_handle, t_time)?;
                        let mut powered = sg;
                        for _ in 0..k {
                            powered = gen_handle.matrix().matmul(&powered);
                        }
                        sup = sup.max(op_norm_2(&powered));
                    }
                }
                out.push(((k, t_time), sup));
            }
        }
        Ok(out)
    };
    let family_sups = family_values(8, 20.0)?;
    let family_sups_refined = family_values(16, 40.0)?;

    Ok(ShiftedOpsReport {
        angle_shifted,
        angle_shifted_bound: omega.max(z.arg().abs()),
        angle_power,
        angle_power_bound: alpha * max_angle,
        zero_in_resolvent: shifted.zero_resolvent_radius > 0.0,
        family_sups,
        family_sups_refined,
    })
}

impl ShiftedOpsReport {
    pub fn report(&self, quantity: &str, slack: f64, family_factor: f64) -> CertReport {
        let angle_ok = match (self.angle_shifted, self.angle_power) {
            (Some(a1), Some(a2)) => {
                a1 <= self.angle_shifted_bound + slack && a2 <= self.angle_power_bound + slack
            }
            _ => false,
        };
        let family_ok = self
            .family_sups
            .iter()
            .zip(self.family_sups_refined.iter())
            .all(|((_, s0), (_, s1))| s1.is_finite() && *s1 <= family_factor * s0.max(1e-300));
        let pass = angle_ok && self.zero_in_resolvent && family_ok;
        CertReport {
            quantity: quantity.into(),
            samples: self
                .family_sups
                .iter()
                .map(|((k, t), v)| Sample {
                    coord_re: *k as f64,
                    coord_im: *t,
                    value: *v,
                })
                .collect(),
            fit: None,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: format!(
                "shifted angles within declared bounds (+{slack}), family sup stable within {family_factor}x"
            ),
            metadata: serde_json::json!({
                "angle_shifted": self.angle_shifted,
                "angle_shifted_bound": self.angle_shifted_bound,
                "angle_power": self.angle_power,
                "angle_power_bound": self.angle_power_bound,
                "zero_in_resolvent": self.zero_in_resolvent,
            }),
        }
    }
}

/// Norm-integral certification data for the multiplier family `B_ξ^{ir}`.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierReport {
    /// `sup_ξ ||B_ξ^{ir}||`
    pub s0: f64,
    pub s0_refined: f64,
    /// `sup_ξ ||ξ ∂_ξ B_ξ^{ir}||`
    pub s1: f64,
    pub s1_refined: f64,
    /// log-log slope of `||∂_ξ B_ξ^{ir}||` over the tail window
    pub tail_exponent: f64,
    /// same slope for the regularized family `B_ξ^{-1/4 + ir}`
    pub tail_exponent_regularized: f64,
    pub tail_window: (f64, f64),
    /// partial integrals `I(Ξ) = ∫_0^Ξ ||∂_ξ B_ξ^{ir}|| dξ` at doubling cutoffs
    pub partial_integrals: Vec<(f64, f64)>,
    /// successive differences `I(2Ξ) - I(Ξ)`
    pub cauchy_differences: Vec<f64>,
}

/// `∂_ξ B_ξ^z` through the eigen-oracle of a Hermitian `A`:
/// `∂_ξ B_ξ^z = 16 z π² ξ (-A + k/2 + 4π²ξ²) B_ξ^(z-1)` evaluated on the
/// scalar symbol.
fn multiplier_derivative_norm(
    a: &OperatorHandle,
    params: &ModelParams,
    xi: f64,
    z: C64,
) -> Result<f64> {
    let heig = a
        .hermitian_eig()
        .ok_or_else(|| Error::HypothesisViolation("multiplier scan needs Hermitian A".into()))?;
    let pi2 = std::f64::consts::PI.powi(2);
    let mat = heig.apply_fn(|av| {
        let b = b_xi_symbol(C64::new(av, 0.0), params.k, params.r_prime, xi);
        let w = C64::new(-av + 0.5 * params.k + 4.0 * pi2 * xi * xi, 0.0);
        z * C64::new(16.0 * pi2 * xi, 0.0) * w * (b.ln() * (z - 1.0)).exp()
    });
    Ok(op_norm_2(&mat))
}

fn multiplier_power_norm(a: &OperatorHandle, params: &ModelParams, xi: f64, z: C64) -> Result<f64> {
    Ok(op_norm_2(&crate::operators::b_xi_power_spectral(a, params, xi, z)?))
}

pub fn verify_multiplier_integrability(
    a: &OperatorHandle,
    params: &ModelParams,
    r: f64,
    xi_max: f64,
    grid_points: usize,
) -> Result<MultiplierReport> {
    if r.abs() > 10.0 {
        return Err(Error::Validation("multiplier scan restricted to |r| <= 10".into()));
    }
    if xi_max < 100.0 {
        return Err(Error::Validation("need xi_max >= 100".into()));
    }
    let ir = C64::new(0.0, r);

    let scan = |points: usize| -> Result<(f64, f64)> {
        let mut grid: Vec<f64> = (1..=points / 4).map(|i| i as f64 / (points / 4) as f64).collect();
        grid.extend(logspace(1.0, xi_max, 3 * points / 4));
        let mut s0 = multiplier_power_norm(a, params, 0.0, ir)?;
        let mut s1 = 0.0f64;
        for &xi in &grid {
            s0 = s0.max(multiplier_power_norm(a, params, xi, ir)?);
            s1 = s1.max(xi * multiplier_derivative_norm(a, params, xi, ir)?);
        }
        Ok((s0, s1))
    };
    let (s0, s1) = scan(grid_points)?;
    let (s0_refined, s1_refined) = scan(2 * grid_points)?;

    // tail slope over the decade window [10, min(1000, xi_max)]
    let window = (10.0f64, xi_max.min(1000.0));
    let fit_slope = |z: C64| -> Result<f64> {
        let xs = logspace(window.0, window.1, 25);
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|&xi| {
                multiplier_derivative_norm(a, params, xi, z).map(|v| (xi.ln(), v.max(1e-300).ln()))
            })
            .collect::<Result<_>>()?;
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
    };
    let tail_exponent = fit_slope(ir)?;
    let tail_exponent_regularized = fit_slope(C64::new(-0.25, r))?;

    // partial integrals at doubling cutoffs ending at xi_max
    let mut cutoffs = vec![xi_max];
    while *cutoffs.last().unwrap() > 2.0 {
        let next = cutoffs.last().unwrap() / 2.0;
        cutoffs.push(next);
        if cutoffs.len() >= 5 {
            break;
        }
    }
    cutoffs.reverse();
    let integral_to = |cut: f64| -> Result<f64> {
        let mut grid: Vec<f64> = (0..=grid_points / 4)
            .map(|i| i as f64 / (grid_points / 4) as f64)
            .collect();
        grid.extend(logspace(1.0001, cut, grid_points));
        let vals: Vec<f64> = grid
            .iter()
            .map(|&xi| multiplier_derivative_norm(a, params, xi, ir))
            .collect::<Result<_>>()?;
        let mut acc = 0.0;
        for i in 0..grid.len() - 1 {
            acc += 0.5 * (vals[i] + vals[i + 1]) * (grid[i + 1] - grid[i]);
        }
        Ok(acc)
    };
    let partial_integrals: Vec<(f64, f64)> = cutoffs
        .iter()
        .map(|&c| integral_to(c).map(|v| (c, v)))
        .collect::<Result<_>>()?;
    let cauchy_differences: Vec<f64> = partial_integrals
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .collect();

    Ok(MultiplierReport {
        s0,
        s0_refined,
        s1,
        s1_refined,
        tail_exponent,
        tail_exponent_regularized,
        tail_window: window,
        partial_integrals,
        cauchy_differences,
    })
}

impl MultiplierReport {
    pub fn report(&self, quantity: &str, exponent_window: (f64, f64), s0_expected: Option<f64>) -> CertReport {
        let exponent_ok =
            self.tail_exponent >= exponent_window.0 && self.tail_exponent <= exponent_window.1;
        let cauchy_ok = self
            .cauchy_differences
            .windows(2)
            .all(|w| w[1] <= 0.5 * w[0] + 1e-12);
        let s0_ok = s0_expected
            .map(|target| (self.s0 - target).abs() <= 1e-6)
            .unwrap_or(true);
        let pass = exponent_ok && cauchy_ok && s0_ok;
        CertReport {
            quantity: quantity.into(),
            samples: self
                .partial_integrals
                .iter()
                .map(|(c, v)| Sample::real(*c, *v))
                .collect(),
            fit: Some(Fit {
                c: self.s1,
                slope: self.tail_exponent,
                residual: 0.0,
            }),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: format!(
                "tail exponent in [{}, {}], Cauchy differences halving, s0 within 1e-6 of target",
                exponent_window.0, exponent_window.1
            ),
            metadata: serde_json::json!({
                "s0": self.s0,
                "s1": self.s1,
                "s0_refined": self.s0_refined,
                "s1_refined": self.s1_refined,
                "tail_exponent": self.tail_exponent,
                "tail_exponent_regularized": self.tail_exponent_regularized,
            }),
        }
    }
}

/// Random-sampling check of the two scalar inequalities behind the sector
/// estimates.
#[derive(Debug, Clone, Serialize)]
pub struct AngleInequalityReport {
    pub samples: usize,
    pub violations: usize,
    pub max_violation: f64,
    /// defect of the equality case `z1 = 1, z2 = i`
    pub equality_gap: f64,
}

pub fn verify_angle_inequalities(sample_count: usize, seed: u64) -> Result<AngleInequalityReport> {
    if sample_count < 10_000 {
        return Err(Error::Validation("need at least 1e4 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut max_violation = 0.0f64;
    let slack = 1e-12;

    let mut check = |lhs: f64, rhs: f64, scale: f64| {
        let defect = rhs - lhs;
        if defect > slack * scale.max(1.0) {
            violations += 1;
            max_violation = max_violation.max(defect);
        }
    };

    for _ in 0..sample_count {
        // |z1 + z2| >= (|z1| + |z2|) |cos((arg z1 - arg z2)/2)|
        let z1 = C64::from_polar(rng.gen_range(1e-3..1e3), rng.gen_range(-3.1415..3.1415));
        let z2 = C64::from_polar(rng.gen_range(1e-3..1e3), rng.gen_range(-3.1415..3.1415));
        let lhs = (z1 + z2).norm();
        let rhs = (z1.norm() + z2.norm()) * (0.5 * (z1.arg() - z2.arg())).cos().abs();
        check(lhs, rhs, z1.norm() + z2.norm());

        // |z + c| >= C max(|z|, c) on the closed sector, c > 0, C = cos(θ0/2)
        let theta0 = rng.gen_range(1e-3..std::f64::consts::PI - 1e-3);
        let z = C64::from_polar(rng.gen_range(1e-3..1e3), rng.gen_range(-theta0..theta0));
        let c_pos = rng.gen_range(1e-3..1e3);
        let bound = (0.5 * theta0).cos() * z.norm().max(c_pos);
        check((z + c_pos).norm(), bound, z.norm() + c_pos);

        // boundary ray, c < 0, C = |sin(θ0/2)|
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let zb = C64::from_polar(rng.gen_range(1e-3..1e3), sign * theta0);
        let c_neg: f64 = -rng.gen_range(1e-3..1e3);
        let bound = (0.5 * theta0).sin().abs() * zb.norm().max(c_neg.abs());
        check((zb + c_neg).norm(), bound, zb.norm() + c_neg.abs());
    }

    let eq_lhs = (C64::new(1.0, 0.0) + C64::i()).norm();
    let eq_rhs = 2.0 * (std::f64::consts::FRAC_PI_4).cos();
    Ok(AngleInequalityReport {
        samples: sample_count,
        violations,
        max_violation,
        equality_gap: (eq_lhs - eq_rhs).abs(),
    })
}

impl AngleInequalityReport {
    pub fn report(&self, quantity: &str) -> CertReport {
        let pass = self.violations == 0 && self.equality_gap < 1e-14;
        CertReport {
            quantity: quantity.into(),
            samples: vec![Sample::real(self.samples as f64, self.violations as f64)],
            fit: None,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: "zero violations beyond 1e-12 slack; equality case exact".into(),
            metadata: serde_json::json!({
                "max_violation": self.max_violation,
                "equality_gap": self.equality_gap
            }),
        }
    }
}

/// Convergence record for the reduction of the resolvent representation to
/// its dominant convolution term `J_{M} J_{L} f`.
#[derive(Debug, Clone, Serialize)]
pub struct DominantTermReport {
    /// `(R, ∫_{Γ, |λ| <= R} ρ(λ) |dλ|)` at doubling truncation radii
    pub partial_integrals: Vec<(f64, f64)>,
    pub differences: Vec<f64>,
    /// `d_{j+1} / d_j`; convergence needs these <= 1/2
    pub shrink_ratios: Vec<f64>,
}

pub fn verify_dominant_term(
    bc: BcKind,
    a: &OperatorHandle,
    params: &ModelParams,
    f: &GridFunction,
    base_radius: f64,
    doublings: usize,
) -> Result<DominantTermReport> {
    // small-angle contour in the spirit of the certified sector bound; the
    // angle choice theta0 + theta' = 0.1 rad is recorded with the report
    let angle = 0.1;
    let eps0 = 0.5 * params.r_prime.min(1.0);
    let r_max = base_radius * (1 << doublings) as f64;
    let panels = ((r_max / eps0).ln() / 0.25).ceil() as usize;
    let contour = crate::contour::build_sector_contour(angle, eps0, r_max, panels, 6)?;

    let rho_at = |lambda: C64| -> Result<f64> {
        let dec = resolvent_apply(bc, a, params, lambda, f)?;
        let mu = MuShift::new(lambda, params).mu;
        let pair = crate::operators::build_m_l(a, params, mu)?;
        let inner = kernel_j(&pair.l_op, f)?;
        let dominant = kernel_j(&pair.m_op, &inner)?;
        Ok(dec.total.sub(&dominant).l2_norm(params.omega_step()))
    };

    let rho: Vec<(f64, f64, f64)> = contour
        .nodes
        .par_iter()
        .map(|node| {
            let val = rho_at(node.lambda).unwrap_or(f64::NAN);
            (node.lambda.norm(), node.weight.norm(), val)
        })
        .collect();
    if rho.iter().any(|(_, _, v)| !v.is_finite()) {
        return Err(Error::Validation("dominant-term scan hit an unresolvable node".into()));
    }

    let mut partial_integrals = Vec::new();
    for j in 0..=doublings {
        let cutoff = base_radius * (1 << j) as f64;
        let integral: f64 = rho
            .iter()
            .filter(|(r, _, _)| *r <= cutoff)
            .map(|(_, w, v)| w * v)
            .sum();
        partial_integrals.push((cutoff, integral));
    }
    let differences: Vec<f64> = partial_integrals.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let shrink_ratios: Vec<f64> = differences
        .windows(2)
        .map(|w| if w[0].abs() > 1e-300 { w[1] / w[0] } else { 0.0 })
        .collect();
    Ok(DominantTermReport {
        partial_integrals,
        differences,
        shrink_ratios,
    })
}

impl DominantTermReport {
    pub fn report(&self, quantity: &str) -> CertReport {
        let pass = !self.shrink_ratios.is_empty() && self.shrink_ratios.iter().all(|r| *r <= 0.5);
        CertReport {
            quantity: quantity.into(),
            samples: self
                .partial_integrals
                .iter()
                .map(|(r, v)| Sample::real(*r, *v))
                .collect(),
            fit: None,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            criterion: "truncation differences shrink at least 2x per radius doubling".into(),
            metadata: serde_json::json!({
                "differences": self.differences,
                "shrink_ratios": self.shrink_ratios,
                "contour_angle": 0.1,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dirichlet_laplacian_1d;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn posdef_handle(values: &[f64]) -> OperatorHandle {
        OperatorHandle::new_auto(ComplexMatrix::from_diag(
            &values.iter().map(|v| c(*v, 0.0)).collect::<Vec<_>>(),
        ))
        .unwrap()
    }

    #[test]
    fn scaled_resolvent_scalar_example() {
        let t = posdef_handle(&[1.0]);
        let v = scaled_resolvent_norm(&t, c(-1.0, 0.0));
        approx::assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sector_angle_of_posdef_is_tiny() {
        let t = posdef_handle(&[0.5, 2.0, 7.0]);
        let radii = logspace(1e-3, 1e3, 30);
        let report = estimate_sector_angle(&t, &default_probe_angles(), &radii).unwrap();
        let angle = report.estimated_angle.unwrap();
        assert!(angle <= 0.01, "estimated {angle}");
    }

    #[test]
    fn sector_angle_detects_rotated_spectrum() {
        let t = OperatorHandle::new_auto(ComplexMatrix::from_diag(&[
            C64::from_polar(1.0, std::f64::consts::PI / 6.0),
            C64::from_polar(1.0, -std::f64::consts::PI / 6.0),
        ]))
        .unwrap();
        let radii = logspace(1e-3, 1e3, 30);
        let mut angles = default_probe_angles();
        angles.push(std::f64::consts::PI / 6.0 + 0.03);
        let report = estimate_sector_angle(&t, &angles, &radii).unwrap();
        let angle = report.estimated_angle.unwrap();
        let target = std::f64::consts::PI / 6.0;
        assert!(
            angle >= target - 0.05 && angle <= target + 0.05,
            "estimated {angle} vs {target}"
        );
    }

    #[test]
    fn sector_angle_requires_wide_radii() {
        let t = posdef_handle(&[1.0]);
        assert!(matches!(
            estimate_sector_angle(&t, &[0.5], &[1.0, 2.0]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn bip_growth_flat_for_hermitian() {
        let t = posdef_handle(&[0.5, 1.5, 4.0, 9.0]);
        let grid: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.8).collect();
        let report = estimate_bip_growth(&t, &grid, PowerRoute::SpectralOracle).unwrap();
        assert!((report.c_hat - 1.0).abs() < 1e-6, "C = {}", report.c_hat);
        assert!(report.theta_hat.abs() < 1e-3, "theta = {}", report.theta_hat);
        for (_, nrm) in &report.norms {
            assert!((nrm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bip_growth_contour_route_on_stencil() {
        let a0 = dirichlet_laplacian_1d(6, std::f64::consts::PI).unwrap();
        let neg = OperatorHandle::new_auto(a0.matrix().scale(c(-1.0, 0.0))).unwrap();
        let grid = [-5.0, -2.0, 0.0, 2.0, 5.0];
        let report = estimate_bip_growth(&neg, &grid, PowerRoute::Contour { rel_tol: 1e-9 }).unwrap();
        assert!(report.theta_hat.abs() < 1e-3);
        for (_, nrm) in &report.norms {
            assert!((nrm - 1.0).abs() < 1e-8, "norm {nrm}");
        }
    }

    #[test]
    fn envelope_fit_reads_off_slope() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let x = i as f64 * 0.5;
                // envelope 0.3 + 0.7 x with dips below
                let dip = if i % 3 == 0 { 0.0 } else { -0.4 };
                (x, 0.3 + 0.7 * x + dip)
            })
            .collect();
        let fit = envelope_fit(&pts);
        assert!((fit.slope - 0.7).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn fourier_lemma_scalar_and_matrix() {
        // scalar T = -1 at xi = 0: integral equals 2
        let t = posdef_handle(&[-1.0]);
        let report = verify_fourier_lemma(&t, &[0.0], None).unwrap();
        assert!(report.sup_rel_error < 1e-7, "err {}", report.sup_rel_error);

        // scalar closed form 2/(1 + 4π²ξ²) at several xi
        let report = verify_fourier_lemma(&t, &[0.25, 1.0], None).unwrap();
        assert!(report.sup_rel_error < 1e-6);

        // Hermitian 8x8
        let a0 = dirichlet_laplacian_1d(8, 3.0).unwrap();
        let report = verify_fourier_lemma(&a0, &[0.0, 0.25, 1.0, 4.0], None).unwrap();
        assert!(report.sup_rel_error <= 1e-6, "sup err {}", report.sup_rel_error);
        assert!(report.tail_bound < 1e-10);
    }

    #[test]
    fn fourier_lemma_rejects_unstable() {
        let t = posdef_handle(&[1.0]);
        assert!(matches!(
            verify_fourier_lemma(&t, &[0.0], None),
            Err(Error::UnstableGenerator { .. })
        ));
    }

    #[test]
    fn angle_inequalities_hold() {
        let report = verify_angle_inequalities(20_000, 42).unwrap();
        assert_eq!(report.violations, 0, "max violation {}", report.max_violation);
        assert!(report.equality_gap < 1e-15);
    }

    #[test]
    fn multiplier_scan_r_zero() {
        let params = ModelParams::default();
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let report = verify_multiplier_integrability(&a0, &params, 0.0, 200.0, 40).unwrap();
        assert!((report.s0 - 1.0).abs() < 1e-12);
        assert!(report.s1 < 1e-12);
    }

    #[test]
    fn multiplier_scalar_tail_is_inverse_first_power() {
        // closed form: the derivative norm decays like 4|r|/ξ, so the
        // fitted tail exponent sits near -1 (and near -2 for the
        // regularized family with ε = 1/4)
        let params = ModelParams {
            m: 2,
            k: 0.0,
            r_prime: 1.0,
            ..Default::default()
        };
        let a = OperatorHandle::new_auto(ComplexMatrix::from_diag(&[c(-1.0, 0.0), c(-1.5, 0.0)])).unwrap();
        let report = verify_multiplier_integrability(&a, &params, 1.0, 1000.0, 60).unwrap();
        assert!(
            (report.tail_exponent + 1.0).abs() < 0.05,
            "exponent {}",
            report.tail_exponent
        );
        assert!(
            (report.tail_exponent_regularized + 2.0).abs() < 0.1,
            "regularized {}",
            report.tail_exponent_regularized
        );
        // s1 approaches 4|r|
        assert!((report.s1 - 4.0).abs() < 0.5, "s1 = {}", report.s1);
    }

    #[test]
    fn multiplier_hermitian_s0_is_one() {
        let params = ModelParams {
            m: 16,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(16, params.omega_length).unwrap();
        let report = verify_multiplier_integrability(&a0, &params, 2.0, 150.0, 30).unwrap();
        assert!((report.s0 - 1.0).abs() <= 1e-8, "s0 = {}", report.s0);
        // refinement stability within 1%
        assert!((report.s0_refined - report.s0).abs() <= 0.01 * report.s0);
        assert!((report.s1_refined - report.s1).abs() <= 0.01 * report.s1.max(1e-12));
    }

    #[test]
    fn dominant_term_reduction_converges_for_bump_data() {
        let params = ModelParams {
            m: 3,
            n: 40,
            k: 0.3,
            r_prime: 1.0,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let section = Array1::from_elem(params.m, c(1.0, 0.0));
        let f = GridFunction::smooth_bump(params.a, params.b, params.n, &section);
        let report = verify_dominant_term(BcKind::Bc1, &a0, &params, &f, 50.0, 3).unwrap();
        assert!(
            report.shrink_ratios.iter().all(|r| *r <= 0.5),
            "ratios {:?}, partials {:?}",
            report.shrink_ratios,
            report.partial_integrals
        );
    }
}
