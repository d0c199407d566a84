//! Derivative-free minimization of a scalar function on a closed interval.
//!
//! A uniform scan locates the best sample, then Brent's method (golden-section
//! steps with parabolic interpolation when it behaves) polishes inside the
//! neighbouring cells.

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - √5) / 2

#[derive(Debug, Clone, Copy)]
pub struct Minimizer {
    /// Uniform samples taken across the interval before refinement.
    pub scan_points: usize,
    /// Absolute tolerance on the abscissa.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for Minimizer {
    fn default() -> Self {
        Minimizer {
            scan_points: 64,
            xtol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

impl Minimizer {
    /// Minimizes `f` over `[lo, hi]`. Non-finite values count as `+∞`.
    pub fn minimize<F>(&self, mut f: F, lo: f64, hi: f64) -> Minimum
    where
        F: FnMut(f64) -> f64,
    {
        debug_assert!(lo <= hi);
        let mut evaluations = 0;
        let mut eval = |x: f64| {
            evaluations += 1;
            let y = f(x);
            if y.is_nan() {
                f64::INFINITY
            } else {
                y
            }
        };

        let n = self.scan_points.max(3);
        let step = (hi - lo) / (n - 1) as f64;
        let at = |k: usize| if k == n - 1 { hi } else { lo + step * k as f64 };

        let mut best = (0, f64::INFINITY);
        for k in 0..n {
            let y = eval(at(k));
            if y < best.1 {
                best = (k, y);
            }
        }
        let (k, y_scan) = best;
        let a = at(k.saturating_sub(1));
        let b = at((k + 1).min(n - 1));
        let refined = self.brent(&mut eval, a, b, at(k), y_scan);
        let (x, value) = if refined.1 <= y_scan {
            refined
        } else {
            (at(k), y_scan)
        };
        Minimum {
            x,
            value,
            evaluations,
        }
    }

    /// Brent's minimizer on `[a, b]` seeded with a known interior sample.
    fn brent<F>(&self, f: &mut F, mut a: f64, mut b: f64, x0: f64, f0: f64) -> (f64, f64)
    where
        F: FnMut(f64) -> f64,
    {
        let (mut x, mut w, mut v) = (x0, x0, x0);
        let (mut fx, mut fw, mut fv) = (f0, f0, f0);
        let mut d: f64 = 0.0;
        let mut e: f64 = 0.0;

        for _ in 0..self.max_iter {
            let m = 0.5 * (a + b);
            let tol1 = 4.0 * f64::EPSILON * x.abs() + self.xtol / 3.0;
            let tol2 = 2.0 * tol1;
            if (x - m).abs() <= tol2 - 0.5 * (b - a) {
                break;
            }

            let mut golden = true;
            if e.abs() > tol1 {
                let r = (x - w) * (fx - fv);
                let mut q = (x - v) * (fx - fw);
                let mut p = (x - v) * q - (x - w) * r;
                q = 2.0 * (q - r);
                if q > 0.0 {
                    p = -p;
                } else {
                    q = -q;
                }
                if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                    e = d;
                    d = p / q;
                    let u = x + d;
                    if u - a < tol2 || b - u < tol2 {
                        d = if m >= x { tol1 } else { -tol1 };
                    }
                    golden = false;
                }
            }
            if golden {
                e = if x >= m { a - x } else { b - x };
                d = GOLDEN * e;
            }

            let u = if d.abs() >= tol1 {
                x + d
            } else if d > 0.0 {
                x + tol1
            } else {
                x - tol1
            };
            let fu = f(u);

            if fu <= fx {
                if u >= x {
                    a = x
                } else {
                    b = x
                }
                (v, fv) = (w, fw);
                (w, fw) = (x, fx);
                (x, fx) = (u, fu);
            } else {
                if u < x {
                    a = u
                } else {
                    b = u
                }
                if fu <= fw || w == x {
                    (v, fv) = (w, fw);
                    (w, fw) = (u, fu);
                } else if fu <= fv || v == x || v == w {
                    (v, fv) = (u, fu);
                }
            }
        }
        (x, fx)
    }
}
