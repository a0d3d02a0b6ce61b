//! Harmonic-oscillator eigenfunctions `psi_n^-(x)` of the constant-field
//! partner Hamiltonian and their one-dimensional ladder algebra.

use crate::fields::UnitSystem;
use crate::numeric::trapezoid;

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_LN: f64 = 460.517_018_598_809_1; // ln(1e200)

/// Lowering or raising direction of a ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

/// Result of a ladder operator acting on a basis state: `coefficient * |target>`.
/// `target` is `None` when the state is annihilated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub coefficient: f64,
    pub target: Option<usize>,
}

impl Action {
    pub fn annihilated() -> Self {
        Action { coefficient: 0.0, target: None }
    }
}

/// `psi_n^-(x)` for a single `n`.
pub fn eval_psi(n: usize, x: f64, units: &UnitSystem) -> f64 {
    eval_psi_all(n, x, units)[n]
}

/// `psi_0^-(x), ..., psi_nmax^-(x)` from the normalized three-term recurrence
///
/// `phi_{n+1} = z sqrt(2/(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1}`.
///
/// The Gaussian factor is kept apart from the polynomial part and applied
/// in log space, so large `n` or `|z|` neither overflow nor underflow early.
pub fn eval_psi_all(nmax: usize, x: f64, units: &UnitSystem) -> Vec<f64> {
    let omega = units.omega();
    let z = units.z(x);
    let log_gauss = -0.5 * z * z;
    let h0 = (omega / (2.0 * std::f64::consts::PI)).powf(0.25);

    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = h0;
    out.push(emit(cur, log_gauss + log_scale));
    for n in 0..nmax {
        let nf = n as f64;
        let next = z * (2.0 / (nf + 1.0)).sqrt() * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            log_scale += RESCALE_LN;
        }
        out.push(emit(cur, log_gauss + log_scale));
    }
    out
}

#[inline]
fn emit(poly: f64, log_factor: f64) -> f64 {
    if poly == 0.0 {
        0.0
    } else {
        poly * log_factor.exp()
    }
}

/// Action of `theta^-` / `theta^+` on `psi_n^-`.
pub fn theta_action(direction: Direction, n: usize) -> Action {
    match direction {
        Direction::Down if n == 0 => Action::annihilated(),
        Direction::Down => Action {
            coefficient: (n as f64).sqrt(),
            target: Some(n - 1),
        },
        Direction::Up => Action {
            coefficient: ((n + 1) as f64).sqrt(),
            target: Some(n + 1),
        },
    }
}

/// `(<m|z|n>, Im <m|p_z|n>)`; the momentum element is purely imaginary.
pub fn zp_matrix_elements(m: usize, n: usize) -> (f64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if m + 1 == n {
        let c = (n as f64).sqrt();
        (s * c, -s * c)
    } else if m == n + 1 {
        let c = ((n + 1) as f64).sqrt();
        (s * c, s * c)
    } else {
        (0.0, 0.0)
    }
}

/// Uniform trapezoid grid for x-integrals of coherent-state quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub center: f64,
    pub half_width: f64,
    pub step: f64,
}

impl QuadratureGrid {
    /// Default grid: centred on `-2k/omega`, half-width
    /// `max(30/sqrt(omega), 4r + 20/sqrt(omega))`, 2000 steps per half-width.
    pub fn for_state(units: &UnitSystem, r: f64) -> Self {
        let s = units.omega().sqrt();
        let half_width = (30.0 / s).max(4.0 * r + 20.0 / s);
        Self {
            center: units.center(),
            half_width,
            step: half_width / 2000.0,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (2.0 * self.half_width / self.step).round() as usize;
        let a = self.center - self.half_width;
        (0..=n).map(|i| a + self.step * i as f64).collect()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let ys: Vec<f64> = self.points().into_iter().map(f).collect();
        trapezoid(&ys, self.step)
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Branch;

    fn units(omega: f64, k: f64) -> UnitSystem {
        UnitSystem::new(omega, k, Branch::Electron).unwrap()
    }

    // Hermite polynomial times normalization, straight from the closed form.
    fn psi_direct(n: usize, x: f64, u: &UnitSystem) -> f64 {
        let z = u.z(x);
        let (mut h0, mut h1) = (1.0, 2.0 * z);
        let h = if n == 0 {
            1.0
        } else {
            for k in 1..n {
                let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        };
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let norm = (1.0 / (2f64.powi(n as i32) * fact) * (u.omega() / (2.0 * std::f64::consts::PI)).sqrt()).sqrt();
        norm * h * (-0.5 * z * z).exp()
    }

    #[test]
    fn ground_state_at_origin() {
        let v = eval_psi(0, 0.0, &units(1.0, 0.0));
        assert!((v - 0.631_618_777_746_064_7).abs() < 1e-15);
    }

    #[test]
    fn first_excited_is_sqrt2_z_times_ground() {
        let u = units(1.3, 0.4);
        for i in 0..30 {
            let x = -6.0 + 0.4 * i as f64;
            let p = eval_psi_all(1, x, &u);
            assert!((p[1] - 2f64.sqrt() * u.z(x) * p[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn recurrence_matches_direct_formula() {
        let u = units(0.8, 1.0);
        for i in 0..61 {
            let x = -12.0 + 0.3 * i as f64;
            let all = eval_psi_all(15, x, &u);
            for n in 0..=15 {
                assert!((all[n] - psi_direct(n, x, &u)).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn normalized_up_to_sixty() {
        let u = units(1.0, 1.0);
        let grid = QuadratureGrid::for_state(&u, 0.0);
        let xs = grid.points();
        let table: Vec<Vec<f64>> = xs.iter().map(|&x| eval_psi_all(60, x, &u)).collect();
        for n in 0..=60 {
            let vals: Vec<f64> = table.iter().map(|p| p[n] * p[n]).collect();
            assert!((grid.integrate_values(&vals) - 1.0).abs() < 1e-8, "n={n}");
        }
        // and orthogonal
        let vals: Vec<f64> = table.iter().map(|p| p[7] * p[12]).collect();
        assert!(grid.integrate_values(&vals).abs() < 1e-8);
    }

    #[test]
    fn bounded_for_large_orders() {
        let u = units(1.0, 0.0);
        for i in 0..=200 {
            let x = -50.0 + 0.5 * i as f64;
            for v in eval_psi_all(200, x, &u) {
                assert!(v.is_finite() && v.abs() < 1.0);
            }
        }
    }

    #[test]
    fn far_tail_does_not_underflow_prematurely() {
        // at z ~ 42 the Gaussian alone is e^-900, below f64 range, but
        // psi_400 is still representable
        let u = units(1.0, 0.0);
        let v = eval_psi_all(400, 60.0, &u);
        assert!(v[400] > 0.0 && v[400].is_finite());
    }

    #[test]
    fn theta_actions() {
        assert_eq!(theta_action(Direction::Down, 0), Action::annihilated());
        assert_eq!(theta_action(Direction::Up, 3), Action { coefficient: 2.0, target: Some(4) });
        for n in 0..20 {
            let up = theta_action(Direction::Up, n);
            let down = theta_action(Direction::Down, up.target.unwrap());
            assert!((up.coefficient * down.coefficient - (n + 1) as f64).abs() < 1e-12);
            let d = theta_action(Direction::Down, n);
            let number = match d.target {
                Some(t) => d.coefficient * theta_action(Direction::Up, t).coefficient,
                None => 0.0,
            };
            assert!((number - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn zp_elements() {
        assert_eq!(zp_matrix_elements(4, 4), (0.0, 0.0));
        let (z, _) = zp_matrix_elements(0, 1);
        assert!((z - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        for m in 0..10 {
            for n in 0..10 {
                let (zmn, pmn) = zp_matrix_elements(m, n);
                let (znm, pnm) = zp_matrix_elements(n, m);
                assert_eq!(zmn, znm);
                // p hermitian and purely imaginary => antisymmetric imaginary part
                assert_eq!(pmn, -pnm);
            }
        }
    }

    #[test]
    fn zp_elements_match_quadrature() {
        // <m|z|n> against x-space integration of z(x) psi_m psi_n
        let u = units(1.0, 1.0);
        let grid = QuadratureGrid::for_state(&u, 0.0);
        let xs = grid.points();
        let table: Vec<Vec<f64>> = xs.iter().map(|&x| eval_psi_all(8, x, &u)).collect();
        for m in 0..8 {
            for n in 0..8 {
                let vals: Vec<f64> = xs.iter().zip(&table).map(|(&x, p)| u.z(x) * p[m] * p[n]).collect();
                let q = grid.integrate_values(&vals);
                assert!((q - zp_matrix_elements(m, n).0).abs() < 1e-9, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn quadrature_grid_shape() {
        let u = units(1.0, 1.0);
        let g = QuadratureGrid::for_state(&u, 5.0);
        assert_eq!(g.center, -2.0);
        assert_eq!(g.half_width, 40.0);
        assert_eq!(g.points().len(), 4001);
    }
}
