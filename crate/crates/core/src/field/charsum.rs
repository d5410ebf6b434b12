use std::f64::consts::PI;

/// An element `sum_e c_e omega^e` of `Z[omega]`, `omega = e^{2 pi i / p}`.
///
/// Character sums over value histograms land here. The only linear relation
/// among `1, omega, ..., omega^{p-1}` is that they sum to zero, so subtracting
/// the last coefficient from all of them gives a canonical form: two sums are
/// equal exactly when their normalized coefficient vectors are. Floating point
/// values are always computed from the normalized form, so equal sums always
/// produce bit-identical floats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    coeffs: Vec<i128>,
}

impl RootSum {
    pub fn zero(p: u32) -> Self {
        RootSum {
            coeffs: vec![0; p as usize],
        }
    }

    pub fn from_coeffs(coeffs: Vec<i128>) -> Self {
        assert!(!coeffs.is_empty());
        RootSum { coeffs }
    }

    pub fn p(&self) -> u32 {
        self.coeffs.len() as u32
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    /// Adds `n * omega^e`.
    #[inline]
    pub fn add_term(&mut self, e: u32, n: i128) {
        self.coeffs[e as usize] += n;
    }

    pub fn add_assign(&mut self, other: &RootSum) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// Multiplies by `omega^e`.
    pub fn rotate(&self, e: u32) -> RootSum {
        let p = self.coeffs.len();
        let mut out = vec![0; p];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[(i + e as usize) % p] = c;
        }
        RootSum { coeffs: out }
    }

    pub fn normalized(&self) -> Vec<i128> {
        let last = *self.coeffs.last().unwrap();
        self.coeffs.iter().map(|&c| c - last).collect()
    }

    /// The sum as a rational integer when it is one: all of `c_1..c_{p-1}` equal.
    pub fn as_integer(&self) -> Option<i128> {
        let c1 = if self.coeffs.len() > 1 { self.coeffs[1] } else { 0 };
        if self.coeffs[1..].iter().all(|&c| c == c1) {
            Some(self.coeffs[0] - c1)
        } else {
            None
        }
    }

    pub fn value(&self) -> (f64, f64) {
        let p = self.coeffs.len();
        if let Some(n) = self.as_integer() {
            return (n as f64, 0.0);
        }
        let norm = self.normalized();
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &b) in norm.iter().enumerate().take(p - 1) {
            let theta = 2.0 * PI * j as f64 / p as f64;
            re += b as f64 * theta.cos();
            im += b as f64 * theta.sin();
        }
        (re, im)
    }

    /// `|z|^2 = z * conj(z)` as an element of `Z[omega]`.
    pub fn norm_sq(&self) -> RootSum {
        let p = self.coeffs.len();
        let mut out = vec![0i128; p];
        for (e, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (f, &b) in self.coeffs.iter().enumerate() {
                out[(e + p - f) % p] += a * b;
            }
        }
        RootSum { coeffs: out }
    }

    /// `|z|^2` as a float, deterministic in the canonical form.
    pub fn norm_sq_f64(&self) -> f64 {
        self.norm_sq().value().0.max(0.0)
    }
}
