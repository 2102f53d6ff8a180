use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

// Godfrey's coefficients for g = 607/128, 15 terms.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln Γ(z)` for `Re z >= 1/2` (principal branch of the Lanczos form).
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// The Gamma function for complex argument.
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole {
            function: "Gamma",
            at: format!("{z}"),
        });
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z).exp())
    } else {
        let s = (PI * z).sin();
        Ok(PI / (s * ln_gamma_right(1.0 - z).exp()))
    }
}

/// `1 / Γ(z)`, an entire function (exactly zero at the poles of Γ).
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        (PI * z).sin() * ln_gamma_right(1.0 - z).exp() / PI
    }
}
