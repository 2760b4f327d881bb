//! Butterworth IIR design as cascaded second-order sections, with
//! zero-phase (forward-backward) application.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One biquad `b0 + b1 z^-1 + b2 z^-2 / 1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z1 * self.a[0] + z2 * self.a[1];
        num / den
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Largest pole magnitude of `1 + a0 z^-1 + a1 z^-2`.
    fn pole_radius(&self) -> f64 {
        let (p, q) = (self.a[0], self.a[1]);
        let disc = p * p - 4.0 * q;
        if disc < 0.0 {
            q.sqrt()
        } else {
            ((-p).abs() + disc.sqrt()) / 2.0
        }
    }

    fn is_first_order(&self) -> bool {
        self.b[2] == 0.0 && self.a[1] == 0.0
    }
}

const SETTLING_TOL: f64 = 1e-3;

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

fn bilinear(s: Complex64, fs: f64) -> Complex64 {
    let k = 2.0 * fs;
    (k + s) / (k - s)
}

fn prewarp(f: f64, fs: f64) -> f64 {
    2.0 * fs * (PI * f / fs).tan()
}

/// Groups digital poles into conjugate pairs (real poles paired with each
/// other) and builds one section per group with the given numerators.
fn sections_from_poles(
    poles: &[Complex64],
    mut numerator: impl FnMut(bool) -> [f64; 3],
) -> Result<Vec<Biquad>> {
    for p in poles {
        if p.norm() >= 1.0 - 1e-12 || !p.re.is_finite() {
            return Err(Error::Numeric(format!("unstable pole {p} in filter design")));
        }
    }
    let tol = 1e-10;
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = poles
        .iter()
        .filter(|p| p.im.abs() <= tol)
        .map(|p| p.re)
        .collect();
    complex.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    real.sort_by(f64::total_cmp);

    let mut out = Vec::new();
    for p in complex {
        out.push(Biquad {
            b: numerator(false),
            a: [-2.0 * p.re, p.norm_sqr()],
        });
    }
    for pair in real.chunks(2) {
        match *pair {
            [p, q] => out.push(Biquad {
                b: numerator(false),
                a: [-(p + q), p * q],
            }),
            [p] => out.push(Biquad {
                b: numerator(true),
                a: [-p, 0.0],
            }),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

impl Sos {
    /// Digital Butterworth bandpass. `order` is the prototype order; the
    /// resulting filter has `2 * order` poles.
    pub fn butter_bandpass(order: usize, lo: f64, hi: f64, fs: f64) -> Result<Self> {
        let nyq = fs / 2.0;
        if !(order >= 1 && lo > 0.0 && lo < hi && hi < nyq) {
            return Err(Error::Config(format!(
                "bandpass {lo}-{hi} Hz (order {order}) invalid at fs={fs}"
            )));
        }
        let w1 = prewarp(lo, fs);
        let w2 = prewarp(hi, fs);
        let bw = w2 - w1;
        let w0 = (w1 * w2).sqrt();
        let mut poles = Vec::with_capacity(2 * order);
        for p in prototype_poles(order) {
            let a = p * bw / 2.0;
            let d = (a * a - w0 * w0).sqrt();
            poles.push(bilinear(a + d, fs));
            poles.push(bilinear(a - d, fs));
        }
        // every section carries one zero at z=1 and one at z=-1
        let sections = sections_from_poles(&poles, |_| [1.0, 0.0, -1.0])?;
        let mut sos = Sos { sections };
        let wc = 2.0 * (w0 / (2.0 * fs)).atan();
        sos.normalize_at(wc);
        Ok(sos)
    }

    /// Digital Butterworth lowpass of the given order.
    pub fn butter_lowpass(order: usize, cutoff: f64, fs: f64) -> Result<Self> {
        if !(order >= 1 && cutoff > 0.0 && cutoff < fs / 2.0) {
            return Err(Error::Config(format!(
                "lowpass cutoff {cutoff} Hz (order {order}) invalid at fs={fs}"
            )));
        }
        let wc = prewarp(cutoff, fs);
        let poles: Vec<Complex64> = prototype_poles(order)
            .into_iter()
            .map(|p| bilinear(p * wc, fs))
            .collect();
        let sections = sections_from_poles(&poles, |first| {
            if first {
                [1.0, 1.0, 0.0]
            } else {
                [1.0, 2.0, 1.0]
            }
        })?;
        let mut sos = Sos { sections };
        sos.normalize_at(0.0);
        Ok(sos)
    }

    /// Rescales numerators so that `|H(e^{jw})| = 1`.
    fn normalize_at(&mut self, w: f64) {
        let n = self.sections.len() as f64;
        let mag = self.response(w).norm();
        let per = (1.0 / mag).powf(1.0 / n);
        for s in &mut self.sections {
            for b in &mut s.b {
                *b *= per;
            }
        }
    }

    /// Complex frequency response at normalized angular frequency `w` (rad/sample).
    pub fn response(&self, w: f64) -> Complex64 {
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(w))
    }

    pub fn magnitude_at(&self, freq: f64, fs: f64) -> f64 {
        self.response(2.0 * PI * freq / fs).norm()
    }

    /// Steady-state initial conditions for a unit step, per section.
    fn step_initial_state(&self) -> Vec<[f64; 2]> {
        let mut level = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let y = s.dc_gain() * level;
                let zi = [y - s.b[0] * level, s.b[2] * level - s.a[1] * y];
                level = y;
                zi
            })
            .collect()
    }

    /// Causal filtering (direct form II transposed).
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut state = vec![[0.0; 2]; self.sections.len()];
        self.filter_with_state(x, &mut state)
    }

    fn filter_with_state(&self, x: &[f64], state: &mut [[f64; 2]]) -> Vec<f64> {
        let mut y = x.to_vec();
        for (s, z) in self.sections.iter().zip(state.iter_mut()) {
            for v in y.iter_mut() {
                let xin = *v;
                let out = s.b[0] * xin + z[0];
                z[0] = s.b[1] * xin - s.a[0] * out + z[1];
                z[1] = s.b[2] * xin - s.a[1] * out;
                *v = out;
            }
        }
        y
    }

    /// Samples for the slowest pole's envelope to fall below `tol`.
    pub fn settling_samples(&self, tol: f64) -> usize {
        let r = self.sections.iter().map(Biquad::pole_radius).fold(0.0, f64::max);
        if r <= 0.0 {
            return 0;
        }
        if r >= 1.0 {
            return usize::MAX;
        }
        (tol.ln() / r.ln()).ceil() as usize
    }

    /// Zero-phase forward-backward filtering with mirror extension at both
    /// ends and steady-state initial conditions. The extension covers the
    /// filter's settling time (down to 1e-3) where the signal is long enough,
    /// so start-up transients die out before reaching the data. Mirroring
    /// (rather than point reflection) keeps the extension free of a DC jump
    /// when the signal ends away from its mean.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let first_order = self.sections.iter().filter(|s| s.is_first_order()).count();
        let ntaps = 2 * self.sections.len() + 1 - first_order;
        let pad = (3 * ntaps).max(self.settling_samples(SETTLING_TOL)).min(n - 1);

        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(x[n - 1 - i]);
        }

        let zi = self.step_initial_state();
        let scaled = |x0: f64| -> Vec<[f64; 2]> {
            zi.iter().map(|z| [z[0] * x0, z[1] * x0]).collect()
        };
        let mut state = scaled(ext[0]);
        let mut y = self.filter_with_state(&ext, &mut state);
        y.reverse();
        let mut state = scaled(y[0]);
        let mut y = self.filter_with_state(&y, &mut state);
        y.reverse();
        y[pad..pad + n].to_vec()
    }
}
