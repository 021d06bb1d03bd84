//! Explicit representation of the resolvent `(-A_i - λI)^{-1}` of the
//! shifted fourth-order operator, `-A_i = -𝒜_i + (k²/4 + r')I`, through the
//! square-root splitting `(∂² - M²)(∂² - L²)u = f` with `μ = λ - k²/4 - r'`:
//!
//! * `J_{T,φ}(x) = ½ T^{-1} ∫_a^b e^{|x-s|T} φ(s) ds` — the free-space
//!   solve of `(∂² - T²)u = φ`,
//! * `K_{T,φ}` — the boundary correction making `K + J` vanish at both ends,
//! * `F₀ = (K+J)_{M} ∘ (K+J)_{L} f` — the particular solution satisfying
//!   `u(a) = u(b) = u''(a) = u''(b) = 0`,
//! * four exponential-profile corrections whose coefficients `α_1..α_4`
//!   enforce the chosen boundary-condition set.
//!
//! Grid convention: `n` uniform nodes including both endpoints, trapezoid
//! quadrature throughout, semigroup factors cached as powers of `e^{hT}`.

use ndarray::Array1;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_complex::ComplexFloat;

use crate::contour::{semigroup_exp, OperatorHandle};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::matrix::{C64, ComplexMatrix, CVector, LinearSolver};
use crate::operators::{build_m_l, BcKind, ModelParams, MuShift, SqrtPair};

/// The assembled resolvent field and its ingredients.
#[derive(Debug, Clone)]
pub struct ResolventDecomposition {
    pub lambda: C64,
    pub mu: C64,
    pub alphas: [CVector; 4],
    pub f0: GridFunction,
    pub total: GridFunction,
}

/// `e^{hT}` together with `φ₁(hT) = (e^z - 1)/z` and
/// `φ₂(hT) = (e^z - 1 - z)/z²`, read off the exponential of the augmented
/// block matrix `[[hT, I, 0], [0, 0, I], [0, 0, 0]]`.
fn phi_functions(t: &ComplexMatrix, h: f64) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let m = t.dim();
    let mut aug = ComplexMatrix::zeros(3 * m);
    let scaled = t.scale(C64::new(h, 0.0));
    for i in 0..m {
        for j in 0..m {
            aug.set(i, j, scaled.get(i, j));
        }
        aug.set(i, m + i, C64::new(1.0, 0.0));
        aug.set(m + i, 2 * m + i, C64::new(1.0, 0.0));
    }
    let e = crate::contour::expm(&aug)?;
    let block = |col0: usize| {
        ComplexMatrix::from_fn(m, |i, j| e.get(i, col0 + j))
    };
    Ok((block(0), block(m), block(2 * m)))
}

/// Prefix/suffix accumulations of `∫ e^{|x-s|T} φ(s) ds`, split at the kink
/// into the two half-integrals. Each panel integrates the piecewise-linear
/// interpolant of `φ` against the exact exponential moments, so the result
/// is the continuum kernel applied to the interpolated data (second order
/// in `h`, with no quadrature error on the exponential factor itself).
struct HalfLineParts {
    /// `L_j = ∫_a^{x_j} e^{(x_j - s)T} φ ds`
    prefix: Vec<CVector>,
    /// `R_j = ∫_{x_j}^b e^{(s - x_j)T} φ ds`
    suffix: Vec<CVector>,
    step: ComplexMatrix,
}

impl HalfLineParts {
    fn new(t: &OperatorHandle, phi: &GridFunction) -> Result<Self> {
        let n = phi.n();
        let h = phi.h();
        if t.spectral_bound() >= 0.0 {
            return Err(Error::UnstableGenerator {
                spectral_bound: t.spectral_bound(),
            });
        }
        let (step, phi1, phi2) = phi_functions(t.matrix(), h)?;
        let hc = C64::new(h, 0.0);
        // panel weights: near-node weight φ₁ - φ₂, far-node weight φ₂
        let w_near = phi1.sub(&phi2).scale(hc);
        let w_far = phi2.scale(hc);

        let mut prefix: Vec<CVector> = Vec::with_capacity(n);
        prefix.push(Array1::zeros(phi.m()));
        for j in 0..n - 1 {
            let next = step.matvec(&prefix[j]) + &w_near.matvec(&phi.row(j)) + &w_far.matvec(&phi.row(j + 1));
            prefix.push(next);
        }

        let mut suffix: Vec<CVector> = vec![Array1::zeros(phi.m()); n];
        for j in (0..n - 1).rev() {
            suffix[j] = step.matvec(&suffix[j + 1])
                + &w_near.matvec(&phi.row(j + 1))
                + &w_far.matvec(&phi.row(j));
        }

        Ok(Self { prefix, suffix, step })
    }

    /// `Q_a = ∫_a^b e^{(s-a)T} φ ds`
    fn q_a(&self) -> &CVector {
        &self.suffix[0]
    }

    /// `Q_b = ∫_a^b e^{(b-s)T} φ ds`
    fn q_b(&self) -> &CVector {
        &self.prefix[self.prefix.len() - 1]
    }
}

/// `J_{T,φ}(x) = ½ T^{-1} ∫_a^b e^{|x-s|T} φ(s) ds` on the grid of `φ`.
pub fn kernel_j(t: &OperatorHandle, phi: &GridFunction) -> Result<GridFunction> {
    let parts = HalfLineParts::new(t, phi)?;
    let solver = LinearSolver::new(t.matrix())?;
    let mut out = GridFunction::zeros(phi.x_lo, phi.x_hi, phi.n(), phi.m());
    let half = C64::new(0.5, 0.0);
    for j in 0..phi.n() {
        let sum = (&parts.prefix[j] + &parts.suffix[j]).mapv(|z| z * half);
        let row = solver.solve(&sum)?;
        for i in 0..phi.m() {
            out.values[(j, i)] = row[i];
        }
    }
    Ok(out)
}

/// Boundary-correction state shared between the kernel value and its
/// endpoint derivatives.
struct KernelKParts {
    /// `P T^{-1} Q_a` and `P T^{-1} Q_b` with `P = (I - e^{2cT})^{-1}`
    va: CVector,
    vb: CVector,
    /// `P Q_a`, `P Q_b`
    pa: CVector,
    pb: CVector,
    e_c: ComplexMatrix,
    e_2c: ComplexMatrix,
}

impl KernelKParts {
    fn new(t: &OperatorHandle, parts: &HalfLineParts, c_len: f64) -> Result<Self> {
        let e_c = semigroup_exp(t, c_len)?;
        let e_2c = e_c.matmul(&e_c);
        let norm = crate::matrix::op_norm_2(&e_2c);
        if norm >= 1.0 - 1e-6 {
            return Err(Error::NeumannSeriesDivergence { norm });
        }
        let neumann = LinearSolver::new(&e_2c.scale(C64::new(-1.0, 0.0)).shift(C64::new(1.0, 0.0)))?;
        let t_solver = LinearSolver::new(t.matrix())?;
        let va = neumann.solve(&t_solver.solve(parts.q_a())?)?;
        let vb = neumann.solve(&t_solver.solve(parts.q_b())?)?;
        let pa = neumann.solve(parts.q_a())?;
        let pb = neumann.solve(parts.q_b())?;
        Ok(Self { va, vb, pa, pb, e_c, e_2c })
    }
}

/// `K_{T,φ}`: the homogeneous correction
/// `½(e^{(b-x)T}e^{cT} - e^{(x-a)T})(I - e^{2cT})^{-1}T^{-1}Q_a
///  + ½(e^{(x-a)T}e^{cT} - e^{(b-x)T})(I - e^{2cT})^{-1}T^{-1}Q_b`,
/// so that `K + J` vanishes at `x = a` and `x = b`.
pub fn kernel_k(t: &OperatorHandle, phi: &GridFunction) -> Result<GridFunction> {
    let parts = HalfLineParts::new(t, phi)?;
    let kp = KernelKParts::new(t, &parts, phi.x_hi - phi.x_lo)?;
    kernel_k_from_parts(&parts, &kp, phi)
}

fn kernel_k_from_parts(
    parts: &HalfLineParts,
    kp: &KernelKParts,
    phi: &GridFunction,
) -> Result<GridFunction> {
    let n = phi.n();
    let half = C64::new(0.5, 0.0);
    // K(x) = ½ e^{(b-x)T}(e^{cT}va - vb) + ½ e^{(x-a)T}(e^{cT}vb - va)
    let back_seed = kp.e_c.matvec(&kp.va) - &kp.vb;
    let fwd_seed = kp.e_c.matvec(&kp.vb) - &kp.va;
    let mut out = GridFunction::zeros(phi.x_lo, phi.x_hi, n, phi.m());

    let mut fwd = fwd_seed;
    for j in 0..n {
        if j > 0 {
            fwd = parts.step.matvec(&fwd);
        }
        for i in 0..phi.m() {
            out.values[(j, i)] = fwd[i] * half;
        }
    }
    let mut back = back_seed;
    for j in (0..n).rev() {
        if j < n - 1 {
            back = parts.step.matvec(&back);
        }
        for i in 0..phi.m() {
            out.values[(j, i)] += back[i] * half;
        }
    }
    Ok(out)
}

/// Solution of `(∂² - T²)u = φ`, `u(a) = u(b) = 0`, with its endpoint
/// derivative traces (`u = K + J`; the traces feed the α-coefficients).
struct EndpointSolve {
    values: GridFunction,
    d_a: CVector,
    d_b: CVector,
}

fn dirichlet_endpoint_solve(t: &OperatorHandle, phi: &GridFunction) -> Result<EndpointSolve> {
    let parts = HalfLineParts::new(t, phi)?;
    let kp = KernelKParts::new(t, &parts, phi.x_hi - phi.x_lo)?;
    let k_part = kernel_k_from_parts(&parts, &kp, phi)?;

    let solver = LinearSolver::new(t.matrix())?;
    let half = C64::new(0.5, 0.0);
    let mut values = k_part;
    for j in 0..phi.n() {
        let sum = (&parts.prefix[j] + &parts.suffix[j]).mapv(|z| z * half);
        let row = solver.solve(&sum)?;
        for i in 0..phi.m() {
            values.values[(j, i)] += row[i];
        }
    }

    // J'(a) = -½ Q_a, J'(b) = +½ Q_b
    // K'(a) = -½(e^{2cT} + I) P Q_a + e^{cT} P Q_b
    // K'(b) = -e^{cT} P Q_a + ½(e^{2cT} + I) P Q_b
    let e2c_plus_id = |v: &CVector| kp.e_2c.matvec(v) + v;
    let d_a = e2c_plus_id(&kp.pa).mapv(|z| z * C64::new(-0.5, 0.0)) + &kp.e_c.matvec(&kp.pb)
        - &parts.q_a().mapv(|z| z * half);
    let d_b = e2c_plus_id(&kp.pb).mapv(|z| z * half) - &kp.e_c.matvec(&kp.pa)
        + &parts.q_b().mapv(|z| z * half);

    Ok(EndpointSolve { values, d_a, d_b })
}

/// `F₀ = (K+J)_{M} applied to (K+J)_{L} f`, plus its endpoint derivative
/// traces `F₀'(a)`, `F₀'(b)`.
pub fn f0_and_traces(
    a: &OperatorHandle,
    params: &ModelParams,
    mu: C64,
    f: &GridFunction,
) -> Result<(GridFunction, CVector, CVector)> {
    let pair = build_m_l(a, params, mu)?;
    f0_with_pair(&pair, f).map(|s| (s.values, s.d_a, s.d_b))
}

fn f0_with_pair(pair: &SqrtPair, f: &GridFunction) -> Result<EndpointSolve> {
    let inner = dirichlet_endpoint_solve(&pair.l_op, f)?;
    dirichlet_endpoint_solve(&pair.m_op, &inner.values)
}

/// Coefficients of the four exponential profiles for the boundary condition
/// set `bc`, given the derivative traces of `F₀`.
pub fn boundary_coefficients(
    bc: BcKind,
    a: &OperatorHandle,
    params: &ModelParams,
    mu: C64,
    d_a: &CVector,
    d_b: &CVector,
) -> Result<[CVector; 4]> {
    let pair = build_m_l(a, params, mu)?;
    boundary_coefficients_with_pair(bc, params, &pair, d_a, d_b)
}

fn cond_2(m: &ComplexMatrix) -> f64 {
    use ndarray_linalg::SVD;
    let (_, sv, _) = m.as_array().svd(false, false).expect("svd failed");
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    }
}

fn checked_solver(mat: &ComplexMatrix) -> Result<LinearSolver> {
    let cond = cond_2(mat);
    if !cond.is_finite() || cond > 1e10 {
        return Err(Error::SingularBoundarySystem { cond });
    }
    LinearSolver::new(mat)
}

fn boundary_coefficients_with_pair(
    bc: BcKind,
    params: &ModelParams,
    pair: &SqrtPair,
    d_a: &CVector,
    d_b: &CVector,
) -> Result<[CVector; 4]> {
    let m_dim = pair.m_op.dim();
    let zero = || Array1::<Complex64>::zeros(m_dim);
    if bc == BcKind::Bc1 {
        return Ok([zero(), zero(), zero(), zero()]);
    }

    let c_len = params.interval_length();
    let m_mat = pair.m_op.matrix();
    let l_mat = pair.l_op.matrix();
    let e_m = semigroup_exp(&pair.m_op, c_len)?;
    let e_l = semigroup_exp(&pair.l_op, c_len)?;
    let id = ComplexMatrix::identity(m_dim);
    let one = C64::new(1.0, 0.0);
    let half = C64::new(0.5, 0.0);

    let id_minus_em = id.sub(&e_m);
    let id_plus_em = id.add(&e_m);
    let id_minus_el = id.sub(&e_l);
    let id_plus_el = id.add(&e_l);

    let sum_tr = d_a + d_b;
    let diff_tr = d_a - d_b;

    match bc {
        BcKind::Bc1 => unreachable!(),
        BcKind::Bc2 => {
            // trace system: u'(a) = u'(b) = 0 and (u'' + Au)(a) = (u'' + Au)(b) = 0.
            // The second pair weighs M-profiles by m2 = k/2 - i d and
            // L-profiles by l2 = k/2 + i d.
            let m2 = pair.m2_plus_a(params.k);
            let l2 = pair.l2_plus_a(params.k);
            let g_plus = m_mat
                .matmul(&id_plus_em.matmul(&id_minus_el))
                .scale(l2)
                .sub(&l_mat.matmul(&id_plus_el.matmul(&id_minus_em)).scale(m2));
            let g_minus = m_mat
                .matmul(&id_minus_em.matmul(&id_plus_el))
                .scale(l2)
                .sub(&l_mat.matmul(&id_minus_el.matmul(&id_plus_em)).scale(m2));
            let sp = checked_solver(&g_plus)?;
            let sm = checked_solver(&g_minus)?;
            let gp_sum = sp.solve(&sum_tr)?;
            let gm_diff = sm.solve(&diff_tr)?;
            let alpha1 = id_minus_el.matvec(&gp_sum).mapv(|z| z * (-half * l2));
            let alpha2 = id_minus_em.matvec(&gp_sum).mapv(|z| z * (half * m2));
            let alpha3 = id_plus_el.matvec(&gm_diff).mapv(|z| z * (-half * l2));
            let alpha4 = id_plus_em.matvec(&gm_diff).mapv(|z| z * (half * m2));
            Ok([alpha1, alpha2, alpha3, alpha4])
        }
        BcKind::Bc3 | BcKind::Bc4 => {
            let b_mu = pair.b_mu();
            let l_plus_m = l_mat.add(m_mat);
            let e_lm = e_l.matmul(&e_m);
            let w = l_plus_m
                .matmul(&l_plus_m)
                .matmul(&e_m.sub(&e_l))
                .scale(one / b_mu);
            let u_mat = id.sub(&e_lm).sub(&w);
            let v_mat = id.sub(&e_lm).add(&w);
            let u_solver = checked_solver(&u_mat)?;
            let v_solver = checked_solver(&v_mat)?;
            let front = |v: &CVector| l_plus_m.matvec(v).mapv(|z| z * (half / b_mu));

            if bc == BcKind::Bc3 {
                let u_sum = u_solver.solve(&sum_tr)?;
                let v_diff = v_solver.solve(&diff_tr)?;
                let alpha1 = front(&id_minus_el.matvec(&u_sum));
                let alpha2 = front(&id_minus_em.matvec(&u_sum)).mapv(|z| -z);
                let alpha3 = front(&id_plus_el.matvec(&v_diff));
                let alpha4 = front(&id_plus_em.matvec(&v_diff)).mapv(|z| -z);
                Ok([alpha1, alpha2, alpha3, alpha4])
            } else {
                let m_solver = LinearSolver::new(m_mat)?;
                let l_solver = LinearSolver::new(l_mat)?;
                let lm_inv_sum = l_mat.matvec(&m_solver.solve(&sum_tr)?);
                let ml_inv_sum = m_mat.matvec(&l_solver.solve(&sum_tr)?);
                let lm_inv_diff = l_mat.matvec(&m_solver.solve(&diff_tr)?);
                let ml_inv_diff = m_mat.matvec(&l_solver.solve(&diff_tr)?);
                let v_lm = v_solver.solve(&lm_inv_sum)?;
                let v_ml = v_solver.solve(&ml_inv_sum)?;
                let u_lm = u_solver.solve(&lm_inv_diff)?;
                let u_ml = u_solver.solve(&ml_inv_diff)?;
                let alpha1 = front(&id_minus_el.matvec(&v_lm)).mapv(|z| -z);
                let alpha2 = front(&id_minus_em.matvec(&v_ml));
                let alpha3 = front(&id_plus_el.matvec(&u_lm)).mapv(|z| -z);
                let alpha4 = front(&id_plus_em.matvec(&u_ml));
                Ok([alpha1, alpha2, alpha3, alpha4])
            }
        }
    }
}

/// Evaluates the four profile terms plus `F₀` on the grid:
/// `total(x) = (e^{(x-a)M} - e^{(b-x)M})α₁ + (e^{(x-a)L} - e^{(b-x)L})α₂
///           + (e^{(x-a)M} + e^{(b-x)M})α₃ + (e^{(x-a)L} + e^{(b-x)L})α₄ + F₀(x)`.
pub fn assemble_total(
    a: &OperatorHandle,
    params: &ModelParams,
    mu: C64,
    alphas: &[CVector; 4],
    f0: &GridFunction,
) -> Result<GridFunction> {
    let pair = build_m_l(a, params, mu)?;
    assemble_total_with_pair(&pair, alphas, f0)
}

fn assemble_total_with_pair(
    pair: &SqrtPair,
    alphas: &[CVector; 4],
    f0: &GridFunction,
) -> Result<GridFunction> {
    let n = f0.n();
    let h = f0.h();
    let step_m = semigroup_exp(&pair.m_op, h)?;
    let step_l = semigroup_exp(&pair.l_op, h)?;
    let mut total = f0.clone();

    // forward profiles carry α₁+α₃ (M) and α₂+α₄ (L); backward profiles
    // carry α₃-α₁ and α₄-α₂
    let mut fwd_m = &alphas[0] + &alphas[2];
    let mut fwd_l = &alphas[1] + &alphas[3];
    for j in 0..n {
        if j > 0 {
            fwd_m = step_m.matvec(&fwd_m);
            fwd_l = step_l.matvec(&fwd_l);
        }
        for i in 0..f0.m() {
            total.values[(j, i)] += fwd_m[i] + fwd_l[i];
        }
    }
    let mut bwd_m = &alphas[2] - &alphas[0];
    let mut bwd_l = &alphas[3] - &alphas[1];
    for j in (0..n).rev() {
        if j < n - 1 {
            bwd_m = step_m.matvec(&bwd_m);
            bwd_l = step_l.matvec(&bwd_l);
        }
        for i in 0..f0.m() {
            total.values[(j, i)] += bwd_m[i] + bwd_l[i];
        }
    }
    Ok(total)
}

/// Full resolvent application `(-A_i - λI)^{-1} f` through the kernel
/// representation.
pub fn resolvent_apply(
    bc: BcKind,
    a: &OperatorHandle,
    params: &ModelParams,
    lambda: C64,
    f: &GridFunction,
) -> Result<ResolventDecomposition> {
    if f.n() != params.n
        || f.m() != params.m
        || (f.x_lo - params.a).abs() > 1e-12
        || (f.x_hi - params.b).abs() > 1e-12
    {
        return Err(Error::GridMismatch(format!(
            "f lives on {}x{} [{}, {}], params expect {}x{} [{}, {}]",
            f.n(),
            f.m(),
            f.x_lo,
            f.x_hi,
            params.n,
            params.m,
            params.a,
            params.b
        )));
    }
    let mu = MuShift::new(lambda, params).mu;
    let pair = build_m_l(a, params, mu)?;
    let f0 = f0_with_pair(&pair, f)?;
    let alphas = boundary_coefficients_with_pair(bc, params, &pair, &f0.d_a, &f0.d_b)?;
    let total = assemble_total_with_pair(&pair, &alphas, &f0.values)?;
    Ok(ResolventDecomposition {
        lambda,
        mu,
        alphas,
        f0: f0.values,
        total,
    })
}

/// Defect of the representation against the defining equation
/// `(-𝒜_i - μI) total = f` and the boundary conditions, all measured at
/// second-order accuracy.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Relative `L²` norm of the interior finite-difference residual
    /// (rows needing no boundary closure).
    pub interior_rel: f64,
    /// Largest boundary-condition violation over both ends, relative to
    /// the data norm.
    pub bc_rel: f64,
}

impl ResidualReport {
    pub fn combined(&self) -> f64 {
        (self.interior_rel.powi(2) + self.bc_rel.powi(2)).sqrt()
    }
}

/// Measures how well `total` satisfies `u'''' + (2A-kI)u'' + (A²-kA)u - μu = f`
/// on the pure-stencil rows `j = 2 .. n-3`, plus one-sided second-order
/// checks of the boundary conditions at both ends.
pub fn defining_residual(
    bc: BcKind,
    a: &OperatorHandle,
    params: &ModelParams,
    lambda: C64,
    f: &GridFunction,
    total: &GridFunction,
) -> Result<ResidualReport> {
    f.check_same_grid(total)?;
    let mu = MuShift::new(lambda, params).mu;
    let n = f.n();
    let h = f.h();
    let omega_h = params.omega_step();
    let inv_h4 = 1.0 / h.powi(4);
    let inv_h2 = 1.0 / (h * h);
    let two_a_minus_k = a.matrix().scale(C64::new(2.0, 0.0)).shift(C64::new(-params.k, 0.0));
    let a2_minus_ka = a
        .matrix()
        .matmul(a.matrix())
        .sub(&a.matrix().scale(C64::new(params.k, 0.0)));

    let row = |j: usize| total.row(j);
    let mut interior_sq = 0.0;
    for j in 2..n - 2 {
        let d4 = (&row(j - 2) - &row(j - 1).mapv(|z| z * C64::new(4.0, 0.0))
            + &row(j).mapv(|z| z * C64::new(6.0, 0.0))
            - &row(j + 1).mapv(|z| z * C64::new(4.0, 0.0))
            + &row(j + 2))
            .mapv(|z| z * C64::new(inv_h4, 0.0));
        let d2 = (&row(j - 1) - &row(j).mapv(|z| z * C64::new(2.0, 0.0)) + &row(j + 1))
            .mapv(|z| z * C64::new(inv_h2, 0.0));
        let res = &d4 + &two_a_minus_k.matvec(&d2) + &a2_minus_ka.matvec(&row(j))
            - &row(j).mapv(|z| z * mu)
            - &f.row(j);
        interior_sq += h * omega_h * res.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let f_norm = f.l2_norm(omega_h).max(1e-300);
    let interior_rel = interior_sq.sqrt() / f_norm;

    // one-sided O(h²) traces at x = a and x = b
    let du_a = (&row(1).mapv(|z| z * C64::new(4.0, 0.0))
        - &row(0).mapv(|z| z * C64::new(3.0, 0.0))
        - &row(2))
        .mapv(|z| z * C64::new(0.5 / h, 0.0));
    let ddu_a = (&row(0).mapv(|z| z * C64::new(2.0, 0.0))
        - &row(1).mapv(|z| z * C64::new(5.0, 0.0))
        + &row(2).mapv(|z| z * C64::new(4.0, 0.0))
        - &row(3))
        .mapv(|z| z * C64::new(inv_h2, 0.0));
    let du_b = (&row(n - 1).mapv(|z| z * C64::new(3.0, 0.0))
        - &row(n - 2).mapv(|z| z * C64::new(4.0, 0.0))
        + &row(n - 3))
        .mapv(|z| z * C64::new(0.5 / h, 0.0));
    let ddu_b = (&row(n - 1).mapv(|z| z * C64::new(2.0, 0.0))
        - &row(n - 2).mapv(|z| z * C64::new(5.0, 0.0))
        + &row(n - 3).mapv(|z| z * C64::new(4.0, 0.0))
        - &row(n - 4))
        .mapv(|z| z * C64::new(inv_h2, 0.0));

    let xnorm = |v: &CVector| (omega_h * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    let violations: Vec<f64> = match bc {
        BcKind::Bc1 => vec![
            xnorm(&row(0)),
            xnorm(&ddu_a),
            xnorm(&row(n - 1)),
            xnorm(&ddu_b),
        ],
        BcKind::Bc2 => vec![
            xnorm(&du_a),
            xnorm(&(&ddu_a + &a.matrix().matvec(&row(0)))),
            xnorm(&du_b),
            xnorm(&(&ddu_b + &a.matrix().matvec(&row(n - 1)))),
        ],
        BcKind::Bc3 => vec![
            xnorm(&row(0)),
            xnorm(&du_a),
            xnorm(&row(n - 1)),
            xnorm(&du_b),
        ],
        BcKind::Bc4 => vec![
            xnorm(&du_a),
            xnorm(&ddu_a),
            xnorm(&du_b),
            xnorm(&ddu_b),
        ],
    };
    let bc_rel = violations.iter().cloned().fold(0.0, f64::max) / f_norm;

    Ok(ResidualReport { interior_rel, bc_rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dirichlet_laplacian_1d;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_handle(x: f64) -> OperatorHandle {
        OperatorHandle::new_auto(ComplexMatrix::from_diag(&[c(x, 0.0)])).unwrap()
    }

    fn ones_grid(a: f64, b: f64, n: usize) -> GridFunction {
        GridFunction::from_fn(a, b, n, 1, |_| Array1::from_elem(1, c(1.0, 0.0)))
    }

    #[test]
    fn kernel_j_of_zero_is_zero() {
        let t = scalar_handle(-1.0);
        let phi = GridFunction::zeros(0.0, 1.0, 16, 1);
        let j = kernel_j(&t, &phi).unwrap();
        assert_eq!(j.max_abs(), 0.0);
    }

    #[test]
    fn kernel_j_scalar_closed_form_at_left_end() {
        // T = -1, φ ≡ 1 on [0,1]: J(0) = ½·(-1)·∫ e^{-s} ds = -½(1 - e^{-1})
        let t = scalar_handle(-1.0);
        let n = 4001;
        let phi = ones_grid(0.0, 1.0, n);
        let j = kernel_j(&t, &phi).unwrap();
        let expected = -0.5 * (1.0 - (-1.0f64).exp());
        assert!((j.values[(0, 0)].re - expected).abs() < 1e-7);
    }

    #[test]
    fn kernel_j_converges_second_order() {
        // T = -2, φ(s) = e^s on [0,1]; closed form from antiderivatives:
        // J(x) = ½ T^{-1} [ e^{xT} (e^{(1-T)x} - 1)/(1-T) + e^{-xT}(e^{(1+T)·1} - e^{(1+T)x})/(1+T) ]
        let t_val = -2.0;
        let t = scalar_handle(t_val);
        let exact = |x: f64| {
            let left = (x * (1.0 - t_val)).exp_m1() / (1.0 - t_val) * (x * t_val).exp();
            let right = ((1.0 + t_val).exp() * 1.0f64.exp_m1().mul_add(0.0, 1.0) - 0.0) * 0.0; // placeholder
            let _ = right;
            let right = ((-x * t_val).exp()) * (((1.0 + t_val) * 1.0).exp() - ((1.0 + t_val) * x).exp())
                / (1.0 + t_val);
            0.5 / t_val * (left + right)
        };
        let mut errs = Vec::new();
        for n in [65usize, 129, 257] {
            let phi = GridFunction::from_fn(0.0, 1.0, n, 1, |x| Array1::from_elem(1, c(x.exp(), 0.0)));
            let j = kernel_j(&t, &phi).unwrap();
            let err = (0..n)
                .map(|jj| (j.values[(jj, 0)].re - exact(j.x_at(jj))).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 > 1.7 && order1 < 2.3, "order {order1}, errs {errs:?}");
        assert!(order2 > 1.7 && order2 < 2.3, "order {order2}");
    }

    #[test]
    fn kernel_k_of_zero_is_zero() {
        let t = scalar_handle(-1.0);
        let phi = GridFunction::zeros(0.0, 1.0, 16, 1);
        let k = kernel_k(&t, &phi).unwrap();
        assert_eq!(k.max_abs(), 0.0);
    }

    #[test]
    fn kernel_boundary_identity() {
        // K(a) + J(a) = 0 = K(b) + J(b)
        let t = scalar_handle(-1.0);
        let n = 101;
        let phi = GridFunction::from_fn(0.0, 1.0, n, 1, |x| {
            Array1::from_elem(1, c((2.3 * x).sin() + 0.4, 0.0))
        });
        let j = kernel_j(&t, &phi).unwrap();
        let k = kernel_k(&t, &phi).unwrap();
        let sum = j.add(&k);
        assert!(sum.values[(0, 0)].norm() < 1e-8);
        assert!(sum.values[(n - 1, 0)].norm() < 1e-8);
    }

    #[test]
    fn kernel_k_scalar_closed_form() {
        // T = -1, c = 1, φ ≡ 1: Q_a = Q_b = 1 - e^{-1};
        // K(x) = ½(e^{-(1-x)}e^{-1} - e^{-x}) p q + ½(e^{-x}e^{-1} - e^{-(1-x)}) p q
        // with p = (1 - e^{-2})^{-1}, q = T^{-1}(1 - e^{-1})
        let t = scalar_handle(-1.0);
        let n = 2001;
        let phi = ones_grid(0.0, 1.0, n);
        let k = kernel_k(&t, &phi).unwrap();
        let p = 1.0 / (1.0 - (-2.0f64).exp());
        let q = -(1.0 - (-1.0f64).exp());
        let exact = |x: f64| {
            0.5 * ((-(1.0 - x) - 1.0f64).exp() - (-x). exp()) * p * q
                + 0.5 * ((-x - 1.0).exp() - (-(1.0 - x)).exp()) * p * q
        };
        for jj in [0usize, n / 3, n / 2, n - 1] {
            let x = k.x_at(jj);
            assert!(
                (k.values[(jj, 0)].re - exact(x)).abs() < 1e-6,
                "x = {x}: {} vs {}",
                k.values[(jj, 0)].re,
                exact(x)
            );
        }
    }

    #[test]
    fn kernel_k_neumann_guard() {
        // nearly-critical generator: e^{2cT} ≈ 1
        let t = scalar_handle(-1e-9);
        let phi = ones_grid(0.0, 1.0, 16);
        assert!(matches!(
            kernel_k(&t, &phi),
            Err(Error::NeumannSeriesDivergence { .. })
        ));
    }

    #[test]
    fn f0_zero_input() {
        let params = ModelParams::default();
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let f = params.zero_grid();
        let (f0, da, db) = f0_and_traces(&a0, &params, c(-3.0, 0.0), &f).unwrap();
        assert_eq!(f0.max_abs(), 0.0);
        assert!(da.iter().all(|z| z.norm() == 0.0));
        assert!(db.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn f0_matches_double_quadrature_oracle() {
        // scalar chain with both operators equal to -1: F0 at x equals the
        // brute-force double integral of the free+corrected kernels
        let params = ModelParams {
            m: 1,
            n: 129,
            k: 0.0,
            r_prime: 1.0,
            ..Default::default()
        };
        let a = scalar_handle(-1.0);
        let mu = c(-2.5, 0.0);
        let f = GridFunction::from_fn(0.0, 1.0, params.n, 1, |x| {
            Array1::from_elem(1, c((1.7 * x).cos(), 0.0))
        });
        let (f0, _, _) = f0_and_traces(&a, &params, mu, &f).unwrap();

        // oracle: dense direct solve of the two tridiagonal Dirichlet
        // problems (∂² - L²)w = f, (∂² - M²)F0 = w on a fine grid
        let pair = build_m_l(&a, &params, mu).unwrap();
        let l2 = pair.l_op.matrix().get(0, 0).powi(2);
        let m2 = pair.m_op.matrix().get(0, 0).powi(2);
        let fine_n = 513;
        let hh = 1.0 / (fine_n - 1) as f64;
        let solve_dirichlet = |t2: C64, rhs: &Vec<C64>| -> Vec<C64> {
            let nn = fine_n - 2;
            let mut mat = Array2::<C64>::zeros((nn, nn));
            for i in 0..nn {
                mat[(i, i)] = c(-2.0 / (hh * hh), 0.0) - t2;
                if i > 0 {
                    mat[(i, i - 1)] = c(1.0 / (hh * hh), 0.0);
                }
                if i + 1 < nn {
                    mat[(i, i + 1)] = c(1.0 / (hh * hh), 0.0);
                }
            }
            let mm = ComplexMatrix::from_array(mat).unwrap();
            let rhs_v = Array1::from_vec(rhs[1..fine_n - 1].to_vec());
            let sol = LinearSolver::new(&mm).unwrap().solve(&rhs_v).unwrap();
            let mut full = vec![c(0.0, 0.0); fine_n];
            for i in 0..nn {
                full[i + 1] = sol[i];
            }
            full
        };
        let f_fine: Vec<C64> = (0..fine_n)
            .map(|j| c((1.7 * (j as f64 * hh)).cos(), 0.0))
            .collect();
        let w_fine = solve_dirichlet(l2, &f_fine);
        let f0_fine = solve_dirichlet(m2, &w_fine);

        // compare on the coarse nodes (fine grid is a refinement by 4)
        let mut max_err = 0.0f64;
        for j in 0..params.n {
            let fine_idx = j * 4;
            let err = (f0.values[(j, 0)] - f0_fine[fine_idx]).norm();
            max_err = max_err.max(err);
        }
        let scale = f0.max_abs().max(1e-30);
        assert!(max_err / scale < 5e-3, "rel err {}", max_err / scale);
    }

    #[test]
    fn f0_traces_match_one_sided_differences() {
        let params = ModelParams {
            m: 2,
            n: 257,
            ..Default::default()
        };
        let a = OperatorHandle::new_auto(ComplexMatrix::from_diag(&[c(-1.0, 0.0), c(-2.0, 0.0)])).unwrap();
        let mu = c(-4.0, 1.0);
        let f = GridFunction::from_fn(params.a, params.b, params.n, 2, |x| {
            Array1::from_vec(vec![c((3.0 * x).sin(), 0.0), c(x * x, -x)])
        });
        let (f0, da, db) = f0_and_traces(&a, &params, mu, &f).unwrap();
        let h = f0.h();
        let n = params.n;
        let fd_a = (&f0.row(1) - &f0.row(0)).mapv(|z| z / c(h, 0.0));
        let fd_b = (&f0.row(n - 1) - &f0.row(n - 2)).mapv(|z| z / c(h, 0.0));
        for i in 0..2 {
            assert!((fd_a[i] - da[i]).norm() < 0.05 * da[i].norm().max(0.1), "i={i}");
            assert!((fd_b[i] - db[i]).norm() < 0.05 * db[i].norm().max(0.1), "i={i}");
        }
    }

    #[test]
    fn bc1_coefficients_are_zero() {
        let params = ModelParams::default();
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let da = Array1::from_elem(params.m, c(1.0, 2.0));
        let db = Array1::from_elem(params.m, c(-0.5, 0.3));
        let alphas = boundary_coefficients(BcKind::Bc1, &a0, &params, c(-3.0, 0.5), &da, &db).unwrap();
        for alpha in &alphas {
            assert!(alpha.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn zero_traces_give_zero_coefficients() {
        let params = ModelParams::default();
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let zero = Array1::zeros(params.m);
        for bc in BcKind::ALL {
            let alphas = boundary_coefficients(bc, &a0, &params, c(-3.0, 0.5), &zero, &zero).unwrap();
            for alpha in &alphas {
                assert!(alpha.iter().all(|z| z.norm() < 1e-14));
            }
        }
    }

    /// Independent oracle: solve the stacked 4m x 4m boundary trace system
    /// assembled directly from the profile traces.
    fn oracle_alphas(
        bc: BcKind,
        params: &ModelParams,
        pair: &SqrtPair,
        d_a: &CVector,
        d_b: &CVector,
    ) -> [CVector; 4] {
        let m_dim = pair.m_op.dim();
        let c_len = params.interval_length();
        let e_m = semigroup_exp(&pair.m_op, c_len).unwrap();
        let e_l = semigroup_exp(&pair.l_op, c_len).unwrap();
        let id = ComplexMatrix::identity(m_dim);
        let m_mat = pair.m_op.matrix();
        let l_mat = pair.l_op.matrix();
        let m2 = m_mat.matmul(m_mat);
        let l2 = l_mat.matmul(l_mat);
        let im = id.sub(&e_m);
        let ip = id.add(&e_m);
        let il = id.sub(&e_l);
        let ipl = id.add(&e_l);

        // trace rows per profile: value/derivative/second/second+Au at a and b
        let val_a = [im.clone(), il.clone(), ip.clone(), ipl.clone()];
        let val_b = [
            im.scale(c(-1.0, 0.0)),
            il.scale(c(-1.0, 0.0)),
            ip.clone(),
            ipl.clone(),
        ];
        let der_a = [m_mat.matmul(&ip), l_mat.matmul(&ipl), m_mat.matmul(&im), l_mat.matmul(&il)];
        let der_b = [
            m_mat.matmul(&ip),
            l_mat.matmul(&ipl),
            m_mat.matmul(&im).scale(c(-1.0, 0.0)),
            l_mat.matmul(&il).scale(c(-1.0, 0.0)),
        ];
        let sec_a = [m2.matmul(&im), l2.matmul(&il), m2.matmul(&ip), l2.matmul(&ipl)];
        let sec_b = [
            m2.matmul(&im).scale(c(-1.0, 0.0)),
            l2.matmul(&il).scale(c(-1.0, 0.0)),
            m2.matmul(&ip),
            l2.matmul(&ipl),
        ];
        let m2a = pair.m2_plus_a(params.k);
        let l2a = pair.l2_plus_a(params.k);
        let seca_a = [
            im.scale(m2a),
            il.scale(l2a),
            ip.scale(m2a),
            ipl.scale(l2a),
        ];
        let seca_b = [
            im.scale(-m2a),
            il.scale(-l2a),
            ip.scale(m2a),
            ipl.scale(l2a),
        ];

        let zero_v: CVector = Array1::zeros(m_dim);
        let neg = |v: &CVector| v.mapv(|z| -z);
        let (rows, rhs): (Vec<[ComplexMatrix; 4]>, Vec<CVector>) = match bc {
            BcKind::Bc1 => (
                vec![val_a, val_b, sec_a, sec_b],
                vec![zero_v.clone(), zero_v.clone(), zero_v.clone(), zero_v.clone()],
            ),
            BcKind::Bc2 => (
                vec![der_a, der_b, seca_a, seca_b],
                vec![neg(d_a), neg(d_b), zero_v.clone(), zero_v.clone()],
            ),
            BcKind::Bc3 => (
                vec![val_a, val_b, der_a, der_b],
                vec![zero_v.clone(), zero_v.clone(), neg(d_a), neg(d_b)],
            ),
            BcKind::Bc4 => (
                vec![der_a, der_b, sec_a, sec_b],
                vec![neg(d_a), neg(d_b), zero_v.clone(), zero_v.clone()],
            ),
        };

        let big_n = 4 * m_dim;
        let mut big = Array2::<C64>::zeros((big_n, big_n));
        let mut big_rhs = Array1::<C64>::zeros(big_n);
        for (bi, row_blocks) in rows.iter().enumerate() {
            for (bj, block) in row_blocks.iter().enumerate() {
                for i in 0..m_dim {
                    for j in 0..m_dim {
                        big[(bi * m_dim + i, bj * m_dim + j)] = block.get(i, j);
                    }
                }
            }
            for i in 0..m_dim {
                big_rhs[bi * m_dim + i] = rhs[bi][i];
            }
        }
        let sol = LinearSolver::new(&ComplexMatrix::from_array(big).unwrap())
            .unwrap()
            .solve(&big_rhs)
            .unwrap();
        let take = |b: usize| Array1::from_iter((0..m_dim).map(|i| sol[b * m_dim + i]));
        [take(0), take(1), take(2), take(3)]
    }

    #[test]
    fn closed_form_coefficients_match_trace_system_oracle() {
        let params = ModelParams {
            m: 3,
            k: 0.6,
            r_prime: 0.9,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for lambda in [c(-5.0, 0.0), c(10.0, 3.0), c(120.0, -20.0)] {
            let mu = MuShift::new(lambda, &params).mu;
            let pair = build_m_l(&a0, &params, mu).unwrap();
            let d_a: CVector =
                Array1::from_iter((0..params.m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            let d_b: CVector =
                Array1::from_iter((0..params.m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            for bc in BcKind::ALL {
                let closed = boundary_coefficients_with_pair(bc, &params, &pair, &d_a, &d_b).unwrap();
                let oracle = oracle_alphas(bc, &params, &pair, &d_a, &d_b);
                for (idx, (have, want)) in closed.iter().zip(oracle.iter()).enumerate() {
                    let scale = want.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-10);
                    let err = have
                        .iter()
                        .zip(want.iter())
                        .map(|(x, y)| (x - y).norm())
                        .fold(0.0f64, f64::max);
                    assert!(
                        err <= 1e-8 * scale.max(1.0),
                        "{bc} alpha{} mismatch {err:.3e} at lambda {lambda}",
                        idx + 1
                    );
                }
            }
        }
    }

    #[test]
    fn bc2_scalar_system_oracle() {
        let params = ModelParams {
            m: 1,
            k: 0.4,
            r_prime: 1.1,
            ..Default::default()
        };
        let a = scalar_handle(-1.3);
        let mu = MuShift::new(c(-6.0, 2.0), &params).mu;
        let pair = build_m_l(&a, &params, mu).unwrap();
        let d_a = Array1::from_elem(1, c(0.7, -0.2));
        let d_b = Array1::from_elem(1, c(-0.1, 0.9));
        let closed = boundary_coefficients_with_pair(BcKind::Bc2, &params, &pair, &d_a, &d_b).unwrap();
        let oracle = oracle_alphas(BcKind::Bc2, &params, &pair, &d_a, &d_b);
        for (have, want) in closed.iter().zip(oracle.iter()) {
            assert!((have[0] - want[0]).norm() < 1e-10 * want[0].norm().max(1.0));
        }
    }

    #[test]
    fn resolvent_of_zero_is_zero() {
        let params = ModelParams::default();
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let f = params.zero_grid();
        let dec = resolvent_apply(BcKind::Bc3, &a0, &params, c(-10.0, 0.0), &f).unwrap();
        assert!(dec.total.max_abs() < 1e-14);
    }

    #[test]
    fn bc1_total_reduces_to_f0_and_sine_mode_closed_form() {
        // m = 1, A = -1, k = 0, r' = 1: sine modes diagonalize BC1 exactly;
        // total = f / ((q²π²/c² + 1)² - μ)
        let params = ModelParams {
            m: 1,
            n: 129,
            k: 0.0,
            r_prime: 1.0,
            ..Default::default()
        };
        let a = scalar_handle(-1.0);
        let lambda = c(-10.0, 0.0);
        let q = 2usize;
        let section = Array1::from_elem(1, c(1.0, 0.0));
        let f = GridFunction::sine_mode(params.a, params.b, params.n, q, &section);
        let dec = resolvent_apply(BcKind::Bc1, &a, &params, lambda, &f).unwrap();

        for alpha in &dec.alphas {
            assert!(alpha.iter().all(|z| z.norm() == 0.0));
        }
        assert!(dec.total.sub(&dec.f0).max_abs() < 1e-14);

        let mu = dec.mu;
        let p2 = (q as f64 * std::f64::consts::PI / params.interval_length()).powi(2);
        let denom = c((p2 + 1.0).powi(2), 0.0) - mu;
        let mut max_rel = 0.0f64;
        for j in 0..params.n {
            let expected = f.values[(j, 0)] / denom;
            let err = (dec.total.values[(j, 0)] - expected).norm();
            max_rel = max_rel.max(err);
        }
        assert!(max_rel < 2e-4, "sine-mode deviation {max_rel}");
    }

    #[test]
    fn resolvent_total_is_reassemblable() {
        let params = ModelParams {
            m: 4,
            n: 48,
            k: 0.3,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let f = GridFunction::from_fn(params.a, params.b, params.n, params.m, |x| {
            Array1::from_iter((0..4).map(|i| c((x * (i as f64 + 1.0)).sin(), 0.2 * x)))
        });
        let dec = resolvent_apply(BcKind::Bc4, &a0, &params, c(-7.0, 1.0), &f).unwrap();
        let re = assemble_total(&a0, &params, dec.mu, &dec.alphas, &dec.f0).unwrap();
        assert!(re.sub(&dec.total).max_abs() <= 1e-10 * dec.total.max_abs().max(1.0));
    }

    #[test]
    fn defining_residual_shrinks_second_order() {
        let params_base = ModelParams {
            m: 3,
            k: 0.5,
            r_prime: 1.0,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(params_base.m, params_base.omega_length).unwrap();
        let lambda = c(-10.0, 0.0);
        for bc in BcKind::ALL {
            let mut residuals = Vec::new();
            for n in [32usize, 64, 128] {
                let params = ModelParams { n, bc, ..params_base.clone() };
                let f = GridFunction::from_fn(params.a, params.b, n, params.m, |x| {
                    Array1::from_iter((0..3).map(|i| c((x * (2.0 + i as f64)).cos(), (x * 1.3).sin())))
                });
                let dec = resolvent_apply(bc, &a0, &params, lambda, &f).unwrap();
                let res = defining_residual(bc, &a0, &params, lambda, &f, &dec.total).unwrap();
                residuals.push(res.combined());
            }
            let order1 = (residuals[0] / residuals[1]).log2();
            let order2 = (residuals[1] / residuals[2]).log2();
            assert!(
                order1 > 1.5 && order1 < 2.6 && order2 > 1.5 && order2 < 2.6,
                "{bc}: orders {order1:.2}/{order2:.2}, residuals {residuals:?}"
            );
        }
    }

    #[test]
    fn resolvent_identity_holds() {
        // the defect is pure discretization error and falls at O(h^2);
        // n = 2048 puts it safely under the 1e-6 working tolerance
        let params = ModelParams {
            m: 3,
            n: 2048,
            k: 0.2,
            bc: BcKind::Bc3,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let f = GridFunction::from_fn(params.a, params.b, params.n, params.m, |x| {
            Array1::from_iter((0..3).map(|i| c((x * (1.0 + i as f64)).sin(), x)))
        });
        let (l1, l2) = (c(-5.0, 0.0), c(-15.0, 3.0));
        let r1 = resolvent_apply(params.bc, &a0, &params, l1, &f).unwrap().total;
        let r2 = resolvent_apply(params.bc, &a0, &params, l2, &f).unwrap().total;
        let r12 = resolvent_apply(params.bc, &a0, &params, l1, &r2).unwrap().total;
        let lhs = r1.sub(&r2);
        let rhs = r12.scale(l1 - l2);
        let omega_h = params.omega_step();
        let rel = lhs.sub(&rhs).l2_norm(omega_h) / rhs.l2_norm(omega_h).max(1e-30);
        assert!(rel < 1e-6, "resolvent identity defect {rel}");
    }

    #[test]
    fn resolvent_matches_direct_discretization() {
        let params = ModelParams {
            m: 3,
            n: 64,
            k: 0.4,
            bc: BcKind::Bc3,
            ..Default::default()
        };
        let a0 = dirichlet_laplacian_1d(params.m, params.omega_length).unwrap();
        let f = GridFunction::from_fn(params.a, params.b, params.n, params.m, |x| {
            Array1::from_iter((0..3).map(|i| c((x * (1.5 + i as f64)).sin(), 0.0)))
        });
        let lambda = c(-10.0, 0.0);
        let dec = resolvent_apply(params.bc, &a0, &params, lambda, &f).unwrap();
        let mu = dec.mu;
        let direct = crate::operators::direct_resolvent_solve(&a0, &params, mu, &f).unwrap();
        let omega_h = params.omega_step();
        let rel = dec.total.sub(&direct).l2_norm(omega_h) / direct.l2_norm(omega_h);
        assert!(rel < 5e-3, "representation vs direct solve: {rel}");
    }
}
