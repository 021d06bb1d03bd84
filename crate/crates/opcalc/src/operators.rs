//! The concrete operators of the generalized-diffusion model: the Dirichlet
//! Laplacian cross-section operator `A₀`, the Fourier-symbol family
//! `B_ξ = -A(-A + kI + 8π²ξ²I) + ((k/2 + 4π²ξ²)² + r')I` with its
//! ξ-derivatives, the square-root pair `M_μ`, `L_μ` splitting the
//! fourth-order operator, and the direct finite-difference discretization of
//! `𝒜_i u = -u'''' - (2A - kI)u'' - (A² - kA)u` under the four boundary
//! condition sets, which serves as the oracle for the resolvent
//! representation.

use ndarray::Array2;

use crate::contour::{fractional_power_auto, OperatorHandle};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::matrix::{C64, ComplexMatrix, LinearSolver};

/// Boundary condition selector for the fourth-order operator on `(a, b)`.
///
/// - `Bc1`: `u = 0`, `u'' = 0` at both ends
/// - `Bc2`: `u' = 0`, `u'' + A u = 0` at both ends
/// - `Bc3`: `u = 0`, `u' = 0` at both ends
/// - `Bc4`: `u' = 0`, `u'' = 0` at both ends
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BcKind {
    Bc1,
    Bc2,
    Bc3,
    Bc4,
}

impl BcKind {
    pub const ALL: [BcKind; 4] = [BcKind::Bc1, BcKind::Bc2, BcKind::Bc3, BcKind::Bc4];

    pub fn index(self) -> usize {
        match self {
            BcKind::Bc1 => 1,
            BcKind::Bc2 => 2,
            BcKind::Bc3 => 3,
            BcKind::Bc4 => 4,
        }
    }
}

impl std::fmt::Display for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BC{}", self.index())
    }
}

/// Model constants: the interval `(a, b)`, the Laplacian coupling `k`, the
/// spectral shift `r'`, the exponent `p`, the nonlinearity constants
/// `k1, k2`, the cross-section length and both grid sizes.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub r_prime: f64,
    pub p: f64,
    pub bc: BcKind,
    pub k1: f64,
    pub k2: f64,
    pub omega_length: f64,
    pub m: usize,
    pub n: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            k: 0.0,
            r_prime: 1.0,
            p: 2.0,
            bc: BcKind::Bc1,
            k1: 1.0,
            k2: 1.0,
            omega_length: std::f64::consts::PI,
            m: 8,
            n: 32,
        }
    }
}

impl ModelParams {
    /// Structural invariants; the Poincaré condition is checked separately
    /// because it needs the assembled cross-section operator.
    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) {
            return Err(Error::Validation(format!("need a < b, got a = {}, b = {}", self.a, self.b)));
        }
        if !(self.r_prime > 0.0) {
            return Err(Error::Validation(format!("need r_prime > 0, got {}", self.r_prime)));
        }
        if !(self.p > 1.0) {
            return Err(Error::Validation(format!("need p > 1, got {}", self.p)));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::Validation(format!(
                "need k1 > 0 and k2 > 0, got k1 = {}, k2 = {}",
                self.k1, self.k2
            )));
        }
        if !(self.omega_length > 0.0) {
            return Err(Error::Validation(format!(
                "need omega_length > 0, got {}",
                self.omega_length
            )));
        }
        if self.m < 2 {
            return Err(Error::Validation(format!("need m >= 2, got {}", self.m)));
        }
        if self.n < 8 {
            return Err(Error::Validation(format!("need n >= 8, got {}", self.n)));
        }
        Ok(())
    }

    /// Full validation including `k > -C_ω` against the assembled `A₀`.
    pub fn validate_with_poincare(&self) -> Result<()> {
        self.validate()?;
        let a0 = dirichlet_laplacian_1d(self.m, self.omega_length)?;
        let c_omega = poincare_constant(&a0);
        if self.k <= -c_omega {
            return Err(Error::Validation(format!(
                "Poincare condition k > -C_omega violated: k = {}, C_omega = {:.6}",
                self.k, c_omega
            )));
        }
        Ok(())
    }

    pub fn interval_length(&self) -> f64 {
        self.b - self.a
    }

    pub fn x_step(&self) -> f64 {
        self.interval_length() / (self.n - 1) as f64
    }

    pub fn omega_step(&self) -> f64 {
        self.omega_length / (self.m + 1) as f64
    }

    pub fn zero_grid(&self) -> GridFunction {
        GridFunction::zeros(self.a, self.b, self.n, self.m)
    }
}

/// The resolvent-shift bookkeeping `μ = λ - k²/4 - r'`.
#[derive(Debug, Clone, Copy)]
pub struct MuShift {
    pub lambda: C64,
    pub mu: C64,
}

impl MuShift {
    pub fn new(lambda: C64, params: &ModelParams) -> Self {
        Self {
            lambda,
            mu: lambda - C64::new(params.k * params.k / 4.0 + params.r_prime, 0.0),
        }
    }
}

/// Second-difference Dirichlet Laplacian on `(0, omega_length)` with `m`
/// interior nodes: `(1/h²) tridiag(1, -2, 1)`, Hermitian negative-definite.
pub fn dirichlet_laplacian_1d(m: usize, omega_length: f64) -> Result<OperatorHandle> {
    if m < 1 || !(omega_length > 0.0) {
        return Err(Error::BadGeometry(format!(
            "need m >= 1 and omega_length > 0, got m = {m}, omega_length = {omega_length}"
        )));
    }
    let h = omega_length / (m + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let mat = ComplexMatrix::from_fn(m, |i, j| {
        if i == j {
            C64::new(-2.0 * inv_h2, 0.0)
        } else if i.abs_diff(j) == 1 {
            C64::new(inv_h2, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorHandle::new_auto(mat)
}

/// The Poincaré constant of the discrete cross-section: smallest `|λ|`
/// over the (negative) spectrum of `A₀`, so `(-C_ω, ∞) ⊂ ρ(A₀)`.
pub fn poincare_constant(a0: &OperatorHandle) -> f64 {
    a0.spectrum().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

/// Scalar symbol of `B_ξ` as a function of an eigenvalue `a` of `A`.
pub fn b_xi_symbol(a: C64, k: f64, r_prime: f64, xi: f64) -> C64 {
    let four_pi2_xi2 = 4.0 * std::f64::consts::PI.powi(2) * xi * xi;
    let half_k = 0.5 * k;
    (-a) * (-a + C64::new(k + 2.0 * four_pi2_xi2, 0.0))
        + C64::new((half_k + four_pi2_xi2).powi(2) + r_prime, 0.0)
}

fn check_b_xi_hypotheses(a: &OperatorHandle, params: &ModelParams) -> Result<()> {
    if a.zero_resolvent_radius <= 0.0 {
        return Err(Error::HypothesisViolation("0 is in the spectrum of A".into()));
    }
    let max_re = a.spectrum().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= params.k.min(0.0) {
        return Err(Error::HypothesisViolation(format!(
            "spectrum of A reaches {max_re:.6}, not contained in (-inf, min(0, k)) with k = {}",
            params.k
        )));
    }
    Ok(())
}

/// The multiplier operator
/// `B_ξ = -A(-A + kI + 8π²ξ²I) + ((k/2 + 4π²ξ²)² + r')I`.
///
/// For Hermitian negative-definite `A` under the spectral hypotheses this is
/// Hermitian positive-definite with `0 ∈ ρ(B_ξ)`.
pub fn build_b_xi(a: &OperatorHandle, params: &ModelParams, xi: f64) -> Result<OperatorHandle> {
    check_b_xi_hypotheses(a, params)?;
    let four_pi2_xi2 = 4.0 * std::f64::consts::PI.powi(2) * xi * xi;
    let neg_a = a.matrix().scale(C64::new(-1.0, 0.0));
    let mat = neg_a
        .matmul(&neg_a.shift(C64::new(params.k + 2.0 * four_pi2_xi2, 0.0)))
        .shift(C64::new(
            (0.5 * params.k + four_pi2_xi2).powi(2) + params.r_prime,
            0.0,
        ));
    OperatorHandle::new_auto(mat)
}

/// `B_ξ^z` through the eigen-oracle of `A` (all `B_ξ` share `A`'s basis).
/// Fast path for the ξ-scans in the certification module.
pub fn b_xi_power_spectral(
    a: &OperatorHandle,
    params: &ModelParams,
    xi: f64,
    z: C64,
) -> Result<ComplexMatrix> {
    let heig = a
        .hermitian_eig()
        .ok_or_else(|| Error::HypothesisViolation("spectral B_xi path needs Hermitian A".into()))?;
    Ok(heig.apply_fn(|av| {
        let b = b_xi_symbol(C64::new(av, 0.0), params.k, params.r_prime, xi);
        (b.ln() * z).exp()
    }))
}

/// Closed-form ξ-derivatives of `B_ξ^α` of first and second order:
///
/// `∂_ξ B_ξ^α  = 16απ²ξ (-A + k/2 I + 4π²ξ² I) B_ξ^(α-1)`
/// `∂²_ξ B_ξ^α = 16απ² (-A + k/2 I + 4π²ξ² I) B_ξ^(α-1) + 128απ⁴ξ² B_ξ^(α-1)`
/// `            + 256α(α-1)π⁴ξ² (-A + k/2 I + 4π²ξ² I)² B_ξ^(α-2)`
///
/// The powers `B_ξ^(α-1)`, `B_ξ^(α-2)` come from the contour-computed
/// `B_ξ^α` divided down by linear solves.
pub fn d_b_xi_alpha_d_xi(
    a: &OperatorHandle,
    params: &ModelParams,
    xi: f64,
    alpha: C64,
    order: usize,
) -> Result<ComplexMatrix> {
    if alpha.re > 1e-12 {
        return Err(Error::Validation(format!(
            "derivative formulas need Re(alpha) <= 0 or alpha = ir, got Re = {}",
            alpha.re
        )));
    }
    if order != 1 && order != 2 {
        return Err(Error::Validation(format!("derivative order must be 1 or 2, got {order}")));
    }
    let b = build_b_xi(a, params, xi)?;
    let pi2 = std::f64::consts::PI.powi(2);
    let pi4 = pi2 * pi2;
    let w = a
        .matrix()
        .scale(C64::new(-1.0, 0.0))
        .shift(C64::new(0.5 * params.k + 4.0 * pi2 * xi * xi, 0.0));

    let b_alpha = fractional_power_auto(&b, alpha, 1e-11)?;
    let solver = LinearSolver::new(b.matrix())?;
    let b_alpha_m1 = solver.solve_matrix(&b_alpha)?;
    match order {
        1 => Ok(w
            .matmul(&b_alpha_m1)
            .scale(alpha * C64::new(16.0 * pi2 * xi, 0.0))),
        _ => {
            let b_alpha_m2 = solver.solve_matrix(&b_alpha_m1)?;
            let term1 = w
                .matmul(&b_alpha_m1)
                .scale(alpha * C64::new(16.0 * pi2, 0.0));
            let term2 = b_alpha_m1.scale(alpha * C64::new(128.0 * pi4 * xi * xi, 0.0));
            let term3 = w
                .matmul(&w)
                .matmul(&b_alpha_m2)
                .scale(alpha * (alpha - 1.0) * C64::new(256.0 * pi4 * xi * xi, 0.0));
            Ok(term1.add(&term2).add(&term3))
        }
    }
}

/// The square-root splitting data at one shift point `μ`.
#[derive(Debug, Clone)]
pub struct SqrtPair {
    pub m_op: OperatorHandle,
    pub l_op: OperatorHandle,
    /// `d = sqrt(-μ - k²/4)` (principal branch); `B_μ = 2 i d`.
    pub d: C64,
}

impl SqrtPair {
    /// `L² + A`-type scalar: the factor `u'' + Au` picks up on `L`-profiles.
    pub fn l2_plus_a(&self, k: f64) -> C64 {
        C64::new(0.5 * k, 0.0) + C64::i() * self.d
    }

    /// Same for `M`-profiles.
    pub fn m2_plus_a(&self, k: f64) -> C64 {
        C64::new(0.5 * k, 0.0) - C64::i() * self.d
    }

    pub fn b_mu(&self) -> C64 {
        C64::new(0.0, 2.0) * self.d
    }
}

/// Square-root operators
/// `M_μ = -sqrt(-A + k/2 I - i sqrt(-μ - k²/4) I)` and
/// `L_μ = -sqrt(-A + k/2 I + i sqrt(-μ - k²/4) I)`
/// with principal branches, so `M² + L² = -2A + kI` and
/// `M²L² = A² - kA - μI`; both spectra lie in the open left half-plane.
pub fn build_m_l(a: &OperatorHandle, params: &ModelParams, mu: C64) -> Result<SqrtPair> {
    let k = params.k;
    let under = -mu - C64::new(k * k / 4.0, 0.0);
    if under.norm() < 1e-10 * (1.0 + mu.norm()) {
        return Err(Error::BranchPoint);
    }
    let d = under.sqrt();

    let shift_m = C64::new(0.5 * k, 0.0) - C64::i() * d;
    let shift_l = C64::new(0.5 * k, 0.0) + C64::i() * d;

    // spectrum of the square-root arguments: -a_j + shift
    let check_off_cut = |shift: C64| -> Result<()> {
        for a_ev in a.spectrum() {
            let w = -a_ev + shift;
            let dist = if w.re > 0.0 { w.norm() } else { w.im.abs() };
            if w.re <= 0.0 && dist < 1e-10 * (1.0 + w.norm()) {
                return Err(Error::SpectrumOnCut);
            }
        }
        Ok(())
    };
    check_off_cut(shift_m)?;
    check_off_cut(shift_l)?;

    let build = |shift: C64| -> Result<OperatorHandle> {
        let (matrix, eigs): (ComplexMatrix, Vec<C64>) = if let Some(heig) = a.hermitian_eig() {
            let mat = heig.apply_fn(|av| -((-C64::new(av, 0.0) + shift).sqrt()));
            let eigs = heig
                .values
                .iter()
                .map(|av| -((-C64::new(*av, 0.0) + shift).sqrt()))
                .collect();
            (mat, eigs)
        } else {
            let geig = crate::matrix::general_eig(a.matrix())?;
            let mat = geig.apply_fn(|av| -((-av + shift).sqrt()))?;
            let eigs = geig.values.iter().map(|av| -((-av + shift).sqrt())).collect();
            (mat, eigs)
        };
        Ok(OperatorHandle::from_parts(matrix, eigs, false, None))
    };

    Ok(SqrtPair {
        m_op: build(shift_m)?,
        l_op: build(shift_l)?,
        d,
    })
}

fn add_block(dst: &mut Array2<C64>, bi: usize, bj: usize, m: usize, block: &ComplexMatrix, scale: C64) {
    let arr = block.as_array();
    for i in 0..m {
        for j in 0..m {
            dst[(bi * m + i, bj * m + j)] += scale * arr[(i, j)];
        }
    }
}

/// Boundary closure blocks: expressions of the boundary value `u_0` and the
/// ghost value `u_{-1}` in terms of the first interior value `u_1` after
/// eliminating the two discrete boundary conditions (same blocks apply
/// mirrored at the right end).
pub struct BoundaryClosure {
    /// `u_0 = value_block · u_1`
    pub value_block: ComplexMatrix,
    /// `u_{-1} = ghost_block · u_1`
    pub ghost_block: ComplexMatrix,
}

pub fn boundary_closure(a: &OperatorHandle, params: &ModelParams) -> Result<BoundaryClosure> {
    let m = a.dim();
    let h = params.x_step();
    let id = ComplexMatrix::identity(m);
    let (value_block, ghost_block) = match params.bc {
        // u(a) = 0; centered u''(a) = 0 gives u_{-1} = 2u_0 - u_1 = -u_1
        BcKind::Bc1 => (ComplexMatrix::zeros(m), id.scale(C64::new(-1.0, 0.0))),
        // centered u'(a) = 0 gives u_{-1} = u_1; u''(a) + A u(a) = 0 then
        // reads (2u_1 - 2u_0)/h² + A u_0 = 0, i.e. u_0 = 2(2I - h²A)^{-1} u_1
        BcKind::Bc2 => {
            let sys = a
                .matrix()
                .scale(C64::new(-h * h, 0.0))
                .shift(C64::new(2.0, 0.0));
            let s2 = LinearSolver::new(&sys)?
                .solve_matrix(&id)?
                .scale(C64::new(2.0, 0.0));
            (s2, id.clone())
        }
        BcKind::Bc3 => (ComplexMatrix::zeros(m), id.clone()),
        BcKind::Bc4 => (id.clone(), id.clone()),
    };
    Ok(BoundaryClosure { value_block, ghost_block })
}

/// Direct second-order finite-difference discretization of
/// `𝒜_i u = -u'''' - (2A - kI)u'' - (A² - kA)u`
/// on the interior nodes `x_1 .. x_{n-2}` with ghost points eliminated by
/// the discrete boundary conditions. Returns the `(n-2)m × (n-2)m` block
/// matrix.
pub fn assemble_fourth_order_direct(a: &OperatorHandle, params: &ModelParams) -> Result<ComplexMatrix> {
    if params.n < 8 || !(params.a < params.b) {
        return Err(Error::BadGeometry(format!(
            "need n >= 8 and a < b, got n = {}, a = {}, b = {}",
            params.n, params.a, params.b
        )));
    }
    if a.dim() != params.m {
        return Err(Error::GridMismatch(format!(
            "operator dim {} vs params.m {}",
            a.dim(),
            params.m
        )));
    }
    let m = params.m;
    let n = params.n;
    let h = params.x_step();
    let inv_h4 = 1.0 / h.powi(4);
    let inv_h2 = 1.0 / (h * h);
    let interior = n - 2;
    let mut mat = Array2::<C64>::zeros((interior * m, interior * m));

    let id = ComplexMatrix::identity(m);
    let closure = boundary_closure(a, params)?;
    // coefficient blocks of -𝒜: u'''' + (2A - kI)u'' + (A² - kA)u, negated
    let a2_minus_ka = a
        .matrix()
        .matmul(a.matrix())
        .sub(&a.matrix().scale(C64::new(params.k, 0.0)));
    let two_a_minus_k = a.matrix().scale(C64::new(2.0, 0.0)).shift(C64::new(-params.k, 0.0));

    let c4: [(i64, f64); 5] = [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)];
    let c2: [(i64, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];

    // substitution of an out-of-band grid index into interior unknowns:
    // returns (interior block column, coupling block)
    let substitute = |g: i64| -> Option<(usize, ComplexMatrix)> {
        let n_i = n as i64;
        if (1..=n_i - 2).contains(&g) {
            Some(((g - 1) as usize, id.clone()))
        } else if g == 0 {
            Some((0, closure.value_block.clone()))
        } else if g == -1 {
            Some((0, closure.ghost_block.clone()))
        } else if g == n_i - 1 {
            Some((interior - 1, closure.value_block.clone()))
        } else if g == n_i {
            Some((interior - 1, closure.ghost_block.clone()))
        } else {
            None
        }
    };

    for row in 0..interior {
        let grid_row = row as i64 + 1;
        for (off, coeff) in c4 {
            if let Some((col, coupling)) = substitute(grid_row + off) {
                // -(u'''' term)
                let block = coupling.scale(C64::new(-coeff * inv_h4, 0.0));
                add_block(&mut mat, row, col, m, &block, C64::new(1.0, 0.0));
            }
        }
        for (off, coeff) in c2 {
            if let Some((col, coupling)) = substitute(grid_row + off) {
                // -(2A - kI) u''
                let block = two_a_minus_k.matmul(&coupling).scale(C64::new(-coeff * inv_h2, 0.0));
                add_block(&mut mat, row, col, m, &block, C64::new(1.0, 0.0));
            }
        }
        // -(A² - kA) u
        add_block(&mut mat, row, row, m, &a2_minus_ka, C64::new(-1.0, 0.0));
    }
    ComplexMatrix::from_array(mat)
}

/// Restriction of a full grid function to the interior nodes, stacked.
pub fn restrict_interior(g: &GridFunction) -> crate::matrix::CVector {
    let n = g.n();
    let m = g.m();
    let mut v = ndarray::Array1::zeros((n - 2) * m);
    for j in 1..n - 1 {
        for i in 0..m {
            v[(j - 1) * m + i] = g.values[(j, i)];
        }
    }
    v
}

/// Rebuilds a full grid function from interior values, filling the two
/// boundary rows through the discrete boundary closure.
pub fn extend_from_interior(
    interior: &crate::matrix::CVector,
    a: &OperatorHandle,
    params: &ModelParams,
) -> Result<GridFunction> {
    let m = params.m;
    let n = params.n;
    if interior.len() != (n - 2) * m {
        return Err(Error::GridMismatch(format!(
            "interior vector length {} vs expected {}",
            interior.len(),
            (n - 2) * m
        )));
    }
    let closure = boundary_closure(a, params)?;
    let mut g = GridFunction::zeros(params.a, params.b, n, m);
    for j in 1..n - 1 {
        for i in 0..m {
            g.values[(j, i)] = interior[(j - 1) * m + i];
        }
    }
    let first = ndarray::Array1::from_iter((0..m).map(|i| interior[i]));
    let last = ndarray::Array1::from_iter((0..m).map(|i| interior[(n - 3) * m + i]));
    let u0 = closure.value_block.matvec(&first);
    let un = closure.value_block.matvec(&last);
    for i in 0..m {
        g.values[(0, i)] = u0[i];
        g.values[(n - 1, i)] = un[i];
    }
    Ok(g)
}

/// Solves `(-𝒜_i - μI) u = f` with the direct discretization. This is the
/// independent oracle the kernel-based resolvent representation is checked
/// against; mind the sign convention `-A_i - λI = -𝒜_i - μI` with
/// `μ = λ - k²/4 - r'`.
pub fn direct_resolvent_solve(
    a: &OperatorHandle,
    params: &ModelParams,
    mu: C64,
    f: &GridFunction,
) -> Result<GridFunction> {
    let direct = assemble_fourth_order_direct(a, params)?;
    // -𝒜 - μI acting on interior unknowns
    let sys = direct.scale(C64::new(-1.0, 0.0)).shift(-mu);
    let rhs = restrict_interior(f);
    let sol = LinearSolver::new(&sys)?.solve(&rhs)?;
    extend_from_interior(&sol, a, params)
}
