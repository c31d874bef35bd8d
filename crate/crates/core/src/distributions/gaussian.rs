use std::f64::consts::{PI, SQRT_2};

use super::{PriceDistribution, Side, Support};
use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_9;

pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// `Φ(z)` through the complementary error function, accurate in the far
/// lower tail.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `1 - Φ(z)` without cancellation.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Inverse of `Φ`: Acklam's rational approximation polished by one Halley
/// step, giving close to full double precision.
pub fn std_normal_quantile(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    if u > 0.5 {
        return -lower_quantile(1.0 - u);
    }
    lower_quantile(u)
}

fn lower_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;

    let x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement against the erfc-based cdf.
    let e = std_normal_cdf(x) - u;
    let step = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - step / (1.0 + 0.5 * x * step)
}

/// Normal law with mean `mean` and standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDist {
    mean: f64,
    sigma: f64,
}

impl GaussianDist {
    pub fn new(mean: f64, sigma: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid(format!("gaussian mean must be finite, got {mean}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("gaussian sigma must be positive, got {sigma}")));
        }
        Ok(GaussianDist { mean, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn z(&self, p: f64) -> f64 {
        (p - self.mean) / self.sigma
    }
}

impl PriceDistribution for GaussianDist {
    fn density(&self, p: f64) -> f64 {
        std_normal_pdf(self.z(p)) / self.sigma
    }

    fn cdf(&self, p: f64) -> f64 {
        std_normal_cdf(self.z(p))
    }

    fn sf(&self, p: f64) -> f64 {
        std_normal_sf(self.z(p))
    }

    fn partial_first_moment(&self, bound: f64, side: Side) -> f64 {
        if bound == f64::INFINITY {
            return if side == Side::Below { self.mean } else { 0.0 };
        }
        if bound == f64::NEG_INFINITY {
            return if side == Side::Below { 0.0 } else { self.mean };
        }
        let z = self.z(bound);
        match side {
            Side::Below => self.mean * std_normal_cdf(z) - self.sigma * std_normal_pdf(z),
            Side::Above => self.mean * std_normal_sf(z) + self.sigma * std_normal_pdf(z),
        }
    }

    fn support(&self) -> Support {
        Support { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.mean + self.sigma * std_normal_quantile(u)
    }

    fn mean(&self) -> f64 {
        self.mean
    }
}
