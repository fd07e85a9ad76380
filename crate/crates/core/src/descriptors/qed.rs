use super::DescriptorVector;

/// Property order used by [`QedParams`] and [`qed_from_properties`].
pub const QED_PROPERTIES: [&str; 8] = ["mw", "alogp", "hba", "hbd", "psa", "rotb", "arom", "alerts"];

/// Asymmetric double sigmoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdsParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub dmax: f64,
}

impl AdsParams {
    /// Desirability of `x`, scaled by `dmax` and capped at 1.
    pub fn desirability(&self, x: f64) -> f64 {
        let rise = 1.0 + (-(x - self.c + self.d / 2.0) / self.e).exp();
        let fall = 1.0 + (-(x - self.c - self.d / 2.0) / self.f).exp();
        let raw = (self.a + self.b / rise * (1.0 - 1.0 / fall)) / self.dmax;
        raw.clamp(f64::MIN_POSITIVE, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QedParams {
    props: [(AdsParams, f64); 8],
}

impl QedParams {
    pub fn new(props: [(AdsParams, f64); 8]) -> QedParams {
        QedParams { props }
    }

    /// `(function, weight)` for each entry of [`QED_PROPERTIES`].
    pub fn properties(&self) -> &[(AdsParams, f64); 8] {
        &self.props
    }
}

/// Weighted geometric mean of the eight desirabilities, in (0, 1].
pub fn qed_from_properties(x: &[f64; 8], params: &QedParams) -> f64 {
    let mut log_sum = 0.0;
    let mut weight_sum = 0.0;
    for (xi, (ads, w)) in x.iter().zip(&params.props) {
        log_sum += w * ads.desirability(*xi).ln();
        weight_sum += w;
    }
    (log_sum / weight_sum).exp().clamp(f64::MIN_POSITIVE, 1.0)
}

pub fn qed(v: &DescriptorVector, params: &QedParams) -> f64 {
    qed_from_properties(&v.qed_inputs(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::DescriptorTables;

    fn argmax(ads: &AdsParams) -> f64 {
        (0..200_000)
            .map(|i| i as f64 * 0.01 - 100.0)
            .max_by(|a, b| ads.desirability(*a).total_cmp(&ads.desirability(*b)))
            .unwrap()
    }

    #[test]
    fn maxima_give_upper_bound() {
        let params = &DescriptorTables::bundled().qed;
        let mut x = [0.0; 8];
        for (xi, (ads, _)) in x.iter_mut().zip(params.properties()) {
            *xi = argmax(ads);
            assert!(ads.desirability(*xi) > 0.999, "dmax should be the function maximum");
        }
        assert!(qed_from_properties(&x, params) > 0.999);
    }

    #[test]
    fn extreme_inputs_stay_positive() {
        let params = &DescriptorTables::bundled().qed;
        let q = qed_from_properties(&[2000.0, 15.0, 40.0, 30.0, 500.0, 60.0, 12.0, 10.0], params);
        assert!(q > 0.0 && q < 0.05);
    }
}
