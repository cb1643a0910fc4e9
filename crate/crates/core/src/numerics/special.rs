//! Macdonald functions K0 and K1 for real positive arguments.
//!
//! Power series below x = 2, Steed's continued fraction (Temme's CF2 form)
//! above. Both branches are good to a few ulps times the cancellation in the
//! series near the switch point, comfortably inside 1e-13 relative.

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

const SERIES_SWITCH: f64 = 2.0;

/// K0 or K1 with argument checks.
pub fn macdonald(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::InvalidArgument(format!("macdonald order must be 0 or 1, got {order}")));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("macdonald argument must be positive, got {x}")));
    }
    let (k0, k1) = k01(x);
    Ok(if order == 0 { k0 } else { k1 })
}

/// K0(x) for x > 0 (NaN otherwise).
pub fn k0(x: f64) -> f64 {
    k01(x).0
}

/// K1(x) for x > 0 (NaN otherwise).
pub fn k1(x: f64) -> f64 {
    k01(x).1
}

/// (K0(x), K1(x)) evaluated together.
pub fn k01(x: f64) -> (f64, f64) {
    if !(x > 0.0) {
        return (f64::NAN, f64::NAN);
    }
    if x <= SERIES_SWITCH {
        series(x)
    } else {
        let (s0, s1) = scaled_cf2(x);
        let e = (-x).exp();
        (s0 * e, s1 * e)
    }
}

/// e^x K0(x) and e^x K1(x); finite for all x > 0.
pub fn k01_scaled(x: f64) -> (f64, f64) {
    if !(x > 0.0) {
        return (f64::NAN, f64::NAN);
    }
    if x <= SERIES_SWITCH {
        let (a, b) = series(x);
        let e = x.exp();
        (a * e, b * e)
    } else {
        scaled_cf2(x)
    }
}

fn series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lnh = (0.5 * x).ln();
    // K0 = -(ln(x/2) + γ) I0 + Σ y^k/(k!)^2 H_k
    // K1 = 1/x + ln(x/2) I1 - (x/4) Σ y^k/(k!(k+1)!) (ψ(k+1) + ψ(k+2))
    let mut t0 = 1.0; // y^k/(k!)^2
    let mut t1 = 1.0; // y^k/(k!(k+1)!)
    let mut harm = 0.0; // H_k
    let mut i0 = 0.0;
    let mut i1s = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            t0 *= y / (kf * kf);
            t1 *= y / (kf * (kf + 1.0));
            harm += 1.0 / kf;
        }
        i0 += t0;
        i1s += t1;
        s0 += t0 * harm;
        let psi_sum = 2.0 * (harm - EULER_GAMMA) + 1.0 / (kf + 1.0);
        s1 += t1 * psi_sum;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1s {
            break;
        }
    }
    let i1 = 0.5 * x * i1s;
    let k0 = -(lnh + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + lnh * i1 - 0.25 * x * s1;
    (k0, k1)
}

fn scaled_cf2(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// |K1'(x) + K0(x) + K1(x)/x| with K1' from a central difference.
pub fn macdonald_derivative_identity_check(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("argument must be positive, got {x}")));
    }
    let step = 1e-4 * x;
    let dk1 = (k1(x + step) - k1(x - step)) / (2.0 * step);
    let (k0v, k1v) = k01(x);
    Ok((dk1 + k0v + k1v / x).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_log_form() {
        let x = 1e-6;
        let approx = -(x / 2.0f64).ln() - EULER_GAMMA;
        assert!(((k0(x) - approx) / approx).abs() < 1e-6);
    }

    #[test]
    fn branches_meet_at_switch() {
        let lo = series(2.0);
        let e = (-2.0f64).exp();
        let (s0, s1) = scaled_cf2(2.0);
        assert!((lo.0 - s0 * e).abs() / lo.0 < 1e-13);
        assert!((lo.1 - s1 * e).abs() / lo.1 < 1e-13);
    }

    #[test]
    fn large_argument_envelope() {
        for &x in &[50.0, 100.0, 300.0, 700.0] {
            assert!(k1(x) < 2.0 * (-x as f64).exp());
        }
        assert_eq!(k0(800.0), 0.0);
        assert!(k01_scaled(800.0).0 > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(macdonald(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(macdonald(0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(macdonald(2, 1.0), Err(Error::InvalidArgument(_))));
        assert!(macdonald_derivative_identity_check(0.0).is_err());
    }

    #[test]
    fn derivative_identity() {
        assert!(macdonald_derivative_identity_check(1.0).unwrap() < 1e-6);
        assert!(macdonald_derivative_identity_check(0.1).unwrap() < 1e-5);
        assert!(macdonald_derivative_identity_check(10.0).unwrap() < 1e-8);
    }
}
