//! Grid-sampled functions: an `X`-valued function of `x ∈ [a, b]` on a
//! uniform grid with endpoints included (`X` = complex m-vectors standing in
//! for `L^p(ω)`), and time-indexed stacks of those for evolution problems.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::C64;

#[derive(Debug, Clone)]
pub struct GridFunction {
    pub x_lo: f64,
    pub x_hi: f64,
    /// `n × m`: row `j` is the value at `x_j = x_lo + j h`.
    pub values: Array2<C64>,
}

impl GridFunction {
    pub fn zeros(x_lo: f64, x_hi: f64, n: usize, m: usize) -> Self {
        Self {
            x_lo,
            x_hi,
            values: Array2::zeros((n, m)),
        }
    }

    pub fn from_fn(x_lo: f64, x_hi: f64, n: usize, m: usize, f: impl Fn(f64) -> Array1<C64>) -> Self {
        let h = (x_hi - x_lo) / (n - 1) as f64;
        let mut values = Array2::zeros((n, m));
        for j in 0..n {
            let row = f(x_lo + j as f64 * h);
            assert_eq!(row.len(), m);
            for i in 0..m {
                values[(j, i)] = row[i];
            }
        }
        Self { x_lo, x_hi, values }
    }

    /// `sin(q π (x-a)/c)` times a fixed cross-section vector.
    pub fn sine_mode(x_lo: f64, x_hi: f64, n: usize, q: usize, section: &Array1<C64>) -> Self {
        let c = x_hi - x_lo;
        Self::from_fn(x_lo, x_hi, n, section.len(), |x| {
            let s = (q as f64 * std::f64::consts::PI * (x - x_lo) / c).sin();
            section.mapv(|z| z * C64::new(s, 0.0))
        })
    }

    /// Smooth bump `exp(-1/(1-y²))` on the middle half of the interval,
    /// zero outside; infinitely flat where it meets zero.
    pub fn smooth_bump(x_lo: f64, x_hi: f64, n: usize, section: &Array1<C64>) -> Self {
        let c = x_hi - x_lo;
        let center = x_lo + 0.5 * c;
        let radius = 0.25 * c;
        Self::from_fn(x_lo, x_hi, n, section.len(), |x| {
            let y = (x - center) / radius;
            let amp = if y.abs() < 1.0 {
                (-1.0 / (1.0 - y * y)).exp() * std::f64::consts::E
            } else {
                0.0
            };
            section.mapv(|z| z * C64::new(amp, 0.0))
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn h(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.n() - 1) as f64
    }

    pub fn x_at(&self, j: usize) -> f64 {
        self.x_lo + j as f64 * self.h()
    }

    pub fn row(&self, j: usize) -> Array1<C64> {
        self.values.row(j).to_owned()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.n() != other.n()
            || self.m() != other.m()
            || (self.x_lo - other.x_lo).abs() > 1e-12
            || (self.x_hi - other.x_hi).abs() > 1e-12
        {
            return Err(Error::GridMismatch(format!(
                "{}x{} on [{}, {}] vs {}x{} on [{}, {}]",
                self.n(),
                self.m(),
                self.x_lo,
                self.x_hi,
                other.n(),
                other.m(),
                other.x_lo,
                other.x_hi
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            values: &self.values + &other.values,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            values: &self.values - &other.values,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            values: self.values.mapv(|z| z * s),
        }
    }

    /// Cross-section norm in `X ≅ L^p(ω)` at grid row `j`.
    pub fn section_norm(&self, j: usize, p: f64, omega_h: f64) -> f64 {
        let s: f64 = self.values.row(j).iter().map(|z| z.norm().powf(p)).sum();
        (omega_h * s).powf(1.0 / p)
    }

    /// Discrete `L^p(a,b; X)` norm: trapezoid weights in `x`, uniform
    /// `omega_h` weight across the section.
    pub fn lp_norm(&self, p: f64, omega_h: f64) -> f64 {
        let h = self.h();
        let n = self.n();
        let mut acc = 0.0;
        for j in 0..n {
            let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
            acc += w * self.section_norm(j, p, omega_h).powf(p);
        }
        acc.powf(1.0 / p)
    }

    /// Discrete `L²` grid norm (the workhorse for residuals).
    pub fn l2_norm(&self, omega_h: f64) -> f64 {
        self.lp_norm(2.0, omega_h)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }
}

/// Uniform-in-time stack of grid functions on `[0, t_final]`.
#[derive(Debug, Clone)]
pub struct SpaceTimeFunction {
    pub t_final: f64,
    pub frames: Vec<GridFunction>,
}

impl SpaceTimeFunction {
    pub fn constant(t_final: f64, steps: usize, frame: &GridFunction) -> Self {
        Self {
            t_final,
            frames: vec![frame.clone(); steps + 1],
        }
    }

    pub fn from_fn(
        t_final: f64,
        steps: usize,
        template: &GridFunction,
        f: impl Fn(f64, f64) -> Array1<C64>,
    ) -> Self {
        let dt = t_final / steps as f64;
        let frames = (0..=steps)
            .map(|k| {
                let t = k as f64 * dt;
                GridFunction::from_fn(template.x_lo, template.x_hi, template.n(), template.m(), |x| {
                    f(t, x)
                })
            })
            .collect();
        Self { t_final, frames }
    }

    pub fn steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps() as f64
    }

    pub fn t_at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Discrete `L^p((0,T); L^p(a,b; X))` norm, trapezoid in time.
    pub fn lp_norm(&self, p: f64, omega_h: f64) -> f64 {
        let dt = self.dt();
        let last = self.frames.len() - 1;
        let mut acc = 0.0;
        for (k, frame) in self.frames.iter().enumerate() {
            let w = if k == 0 || k == last { 0.5 * dt } else { dt };
            acc += w * frame.lp_norm(p, omega_h).powf(p);
        }
        acc.powf(1.0 / p)
    }

    /// `sup_t` of the per-frame `L²` norm.
    pub fn sup_t_l2(&self, omega_h: f64) -> f64 {
        self.frames
            .iter()
            .map(|f| f.l2_norm(omega_h))
            .fold(0.0, f64::max)
    }
}
