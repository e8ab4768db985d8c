//! Thin wrappers over `libm` so the crate stays `no_std`.

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub(crate) fn powi(x: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub(crate) fn log10(x: f64) -> f64 {
    libm::log10(x)
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// `sqrt(C(n, k))`, evaluated in log space so it stays finite well past `n = 1030`.
pub fn sqrt_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    // Summing the two lower terms first keeps the result symmetric in k <-> n-k.
    exp(0.5 * (ln_factorial(n) - (ln_factorial(k) + ln_factorial(n - k))))
}
