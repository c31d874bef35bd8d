use super::{PriceDistribution, Side, Support};

/// The law of `-X` for `X ~ inner`.
///
/// Every method is routed to the mirrored call on `inner` with no extra
/// arithmetic beyond negation, so buyer/seller comparisons match bit for bit.
#[derive(Debug, Clone)]
pub struct Reflected<D> {
    inner: D,
}

impl<D: PriceDistribution> Reflected<D> {
    pub fn new(inner: D) -> Self {
        Reflected { inner }
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }
}

impl<D: PriceDistribution> PriceDistribution for Reflected<D> {
    fn density(&self, p: f64) -> f64 {
        self.inner.density(-p)
    }

    fn cdf(&self, p: f64) -> f64 {
        self.inner.sf(-p)
    }

    fn sf(&self, p: f64) -> f64 {
        self.inner.cdf(-p)
    }

    fn partial_first_moment(&self, bound: f64, side: Side) -> f64 {
        match side {
            Side::Below => -self.inner.partial_first_moment(-bound, Side::Above),
            Side::Above => -self.inner.partial_first_moment(-bound, Side::Below),
        }
    }

    fn support(&self) -> Support {
        let s = self.inner.support();
        Support { lower: -s.upper, upper: -s.lower }
    }

    fn quantile(&self, u: f64) -> f64 {
        -self.inner.quantile(1.0 - u)
    }

    fn mean(&self) -> f64 {
        -self.inner.mean()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints().into_iter().map(|b| -b).collect()
    }
}
