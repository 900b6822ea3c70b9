//! Scalar statistics helpers shared across the crate.
//!
//! The percentile convention is "lower vertex": for a sorted sample of size
//! `n` and level `p`, the percentile is the order statistic with 1-based rank
//! `ceil(n*p)`, except that an integer `n*p` maps to rank `n*p` itself. This
//! is exactly the set of minimizers of the check loss for an intercept-only
//! quantile fit, taken at its lower end.

/// Arithmetic mean. Returns 0.0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator `n - 1`). `None` when `n < 2`.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Population variance (denominator `n`).
pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Lower-vertex percentile of an already sorted slice, `p` in (0, 1).
///
/// Panics if the slice is empty or not sorted (debug builds only for the
/// sortedness check).
pub fn percentile_lower_vertex(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    assert!(p > 0.0 && p < 1.0, "percentile level must be in (0,1)");
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let n = sorted.len();
    let k = n as f64 * p;
    let rank = if (k - k.round()).abs() < 1e-9 * n as f64 {
        // n*p integer: optimal set is [x_(k), x_(k+1)]; take the lower vertex.
        k.round() as usize
    } else {
        k.ceil() as usize
    };
    sorted[rank.clamp(1, n) - 1]
}

/// Convenience: sorts a copy and takes the lower-vertex percentile.
pub fn percentile_of(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in percentile input"));
    percentile_lower_vertex(&v, p)
}

/// Standard normal quantile function (AS 241, double precision).
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "norm_quantile domain is (0,1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * rational(r, &AS241_A, &AS241_B);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        rational(r - 1.6, &AS241_C, &AS241_D)
    } else {
        rational(r - 5.0, &AS241_E, &AS241_F)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard normal CDF (Hart/West double-precision rational approximation).
pub fn norm_cdf(x: f64) -> f64 {
    let z = x.abs();
    let c = if z > 37.0 {
        0.0
    } else {
        let e = (-z * z / 2.0).exp();
        if z < 7.071_067_811_865_475 {
            let num = (((((3.52624965998911e-2 * z + 0.700383064443688) * z
                + 6.37396220353165)
                * z
                + 33.912866078383)
                * z
                + 112.079291497871)
                * z
                + 221.213596169931)
                * z
                + 220.206867912376;
            let den = ((((((8.83883476483184e-2 * z + 1.75566716318264) * z
                + 16.064177579207)
                * z
                + 86.7807322029461)
                * z
                + 296.564248779674)
                * z
                + 637.333633378831)
                * z
                + 793.826512519948)
                * z
                + 440.413735824752;
            e * num / den
        } else {
            e / (2.506628274631001 * (z + 1.0 / (z + 2.0 / (z + 3.0 / (z + 4.0 / (z + 0.65))))))
        }
    };
    if x <= 0.0 {
        c
    } else {
        1.0 - c
    }
}

fn rational(r: f64, num: &[f64; 8], den: &[f64; 8]) -> f64 {
    let mut n = num[7];
    let mut d = den[7];
    for i in (0..7).rev() {
        n = n * r + num[i];
        d = d * r + den[i];
    }
    n / d
}

#[allow(clippy::excessive_precision)] // published coefficients
const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946_1e4,
    4.592_195_393_154_987_2e4,
    6.726_577_092_700_870_1e4,
    3.343_057_558_358_812_8e4,
    2.509_080_928_730_122_7e3,
];
#[allow(clippy::excessive_precision)]
const AS241_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_854_6e3,
];
#[allow(clippy::excessive_precision)]
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
#[allow(clippy::excessive_precision)]
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_8,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
#[allow(clippy::excessive_precision)]
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103_8,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_9e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
#[allow(clippy::excessive_precision)]
const AS241_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_matches_table_conventions() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(percentile_lower_vertex(&v, 0.05), 5.0);
        assert_eq!(percentile_lower_vertex(&v, 0.95), 95.0);
        assert_eq!(percentile_lower_vertex(&[1.0, 2.0, 3.0], 0.5), 2.0);
        // n*p below 1 clamps to the first order statistic
        assert_eq!(percentile_lower_vertex(&[10.0, 20.0], 0.05), 10.0);
    }

    #[test]
    fn sample_sd_basics() {
        assert_eq!(sample_sd(&[1.0]), None);
        let sd = sample_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((sd - 2.13808993529939).abs() < 1e-12);
        assert_eq!(sample_sd(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn norm_quantile_known_values() {
        assert!((norm_quantile(0.5)).abs() < 1e-15);
        assert!((norm_quantile(0.95) - 1.6448536269514722).abs() < 1e-12);
        assert!((norm_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
        assert!((norm_quantile(0.05) + 1.6448536269514722).abs() < 1e-12);
        assert!((norm_quantile(1e-10) + 6.361340902404056).abs() < 1e-9);
    }

    #[test]
    fn norm_cdf_inverts_quantile() {
        // Two independent approximations agreeing pins both down.
        for &p in &[1e-8, 1e-4, 0.01, 0.05, 0.3, 0.5, 0.7, 0.95, 0.99, 0.9999] {
            let x = norm_quantile(p);
            assert!((norm_cdf(x) - p).abs() < 1e-12 * (1.0 + 1.0 / p.min(1.0 - p)));
        }
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(1.96) - 0.9750021048517795).abs() < 1e-12);
    }
}
