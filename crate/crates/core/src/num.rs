//! Tolerance conventions shared by the geometric kernels.
//!
//! Slope argmax over rational breakpoints is exact in theory; in floating
//! point every comparison gets a declared relative tie band instead.

/// Relative tie band for slope and rate comparisons.
pub(crate) const EPS_REL: f64 = 1e-9;

/// `a >= b` up to the relative tie band.
pub(crate) fn ge(a: f64, b: f64) -> bool {
    a >= b - EPS_REL * a.abs().max(b.abs())
}

/// `a` and `b` agree up to the relative tie band (with `scale` as the floor
/// for values near zero).
pub(crate) fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= EPS_REL * a.abs().max(b.abs()).max(scale)
}

/// Neumaier-compensated running sum, used where cumulative curves must stay
/// exact at breakpoints.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
