//! Univariate and bivariate standard normal distribution functions.
//!
//! Transcendentals go through `libm` so results do not depend on the
//! platform math library.
#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const TWO_PI: f64 = 2.0 * PI;

/// Standard normal distribution function.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile function (Wichura, AS 241, PPND16).
///
/// Relative accuracy is about 1e-16 over the whole open unit interval.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = libm::sqrt(-libm::log(r));
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

// Gauss-Legendre half-rules (weight, abscissa) with 6, 12 and 20 points.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// Upper bivariate normal probability `P(X > h, Y > k)` for standard
/// normals with correlation `r` (Drezner-Wesolowsky with Genz's
/// refinements, absolute error around 1e-15).
fn upper(h: f64, k: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = libm::asin(r);
        for &(w, x) in rule {
            for sign in [1.0, -1.0] {
                let sn = libm::sin(asr * (sign * x + 1.0) / 2.0);
                bvn += w * libm::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return bvn * asr / (2.0 * TWO_PI) + cdf(-h) * cdf(-k);
    }
    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = libm::sqrt(a_s);
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * libm::exp(-(b_s / a_s + hk) / 2.0)
            * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = libm::sqrt(b_s);
            bvn -= libm::exp(-hk / 2.0)
                * libm::sqrt(TWO_PI)
                * cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in rule {
            let xs = (a * (x + 1.0)).powi(2);
            let rs = libm::sqrt(1.0 - xs);
            bvn += a
                * w
                * (libm::exp(-b_s / (2.0 * xs) - hk / (1.0 + rs)) / rs
                    - libm::exp(-(b_s / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
            let xs = a_s * (1.0 - x).powi(2) / 4.0;
            let rs = libm::sqrt(1.0 - xs);
            bvn += a
                * w
                * libm::exp(-(b_s / xs + hk) / 2.0)
                * (libm::exp(-hk * xs / (2.0 * (1.0 + rs).powi(2))) / rs
                    - (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + cdf(-h.max(k))
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += cdf(k) - cdf(h);
            } else {
                bvn += cdf(-h) - cdf(-k);
            }
        }
        bvn
    }
}

/// Bivariate standard normal distribution function `P(X <= x, Y <= y)`.
pub fn bivariate_cdf(x: f64, y: f64, rho: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return cdf(y);
    }
    if y == f64::INFINITY {
        return cdf(x);
    }
    if rho >= 1.0 {
        return cdf(x.min(y));
    }
    if rho <= -1.0 {
        return (cdf(x) - cdf(-y)).max(0.0);
    }
    upper(-x, -y, rho).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Plackett's reduction: dΦ2/dρ is the bivariate density, so
    // Φ2(x, y; ρ) = Φ(x)Φ(y) + ∫_0^ρ φ2(x, y; r) dr.
    fn plackett(x: f64, y: f64, rho: f64) -> f64 {
        let dens = |r: f64| {
            let s = 1.0 - r * r;
            (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s)).exp() / (TWO_PI * s.sqrt())
        };
        // composite Simpson, dense enough for 1e-12 on |ρ| <= 0.99
        let n = 20_000;
        let h = rho / n as f64;
        let mut acc = dens(0.0) + dens(rho);
        for i in 1..n {
            acc += dens(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        cdf(x) * cdf(y) + acc * h / 3.0
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let back = cdf(quantile(p));
            assert!((back - p).abs() < 1e-14, "p={p} back={back}");
        }
        for &p in &[1e-15, 1e-10, 1e-5, 1.0 - 1e-10] {
            let back = cdf(quantile(p));
            assert!(((back - p) / p).abs() < 1e-9, "p={p} back={back}");
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert_eq!(quantile(0.5), 0.0);
        // orthant probability 1/4 + asin(ρ)/(2π)
        for &rho in &[-0.95_f64, -0.5, 0.0, 0.3, 0.7181, 0.93, 0.999] {
            let expected = 0.25 + rho.asin() / TWO_PI;
            assert!((bivariate_cdf(0.0, 0.0, rho) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn bivariate_matches_plackett_integral() {
        let pts = [-2.3, -0.7, 0.0, 0.4, 1.5];
        for &rho in &[-0.97, -0.8, -0.5, -0.1, 0.2, 0.6, 0.7181, 0.9, 0.95, 0.99] {
            for &x in &pts {
                for &y in &pts {
                    let got = bivariate_cdf(x, y, rho);
                    let want = plackett(x, y, rho);
                    assert!(
                        (got - want).abs() < 1e-10,
                        "x={x} y={y} rho={rho}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn bivariate_degenerate_correlations() {
        assert_eq!(bivariate_cdf(0.3, -0.2, 1.0), cdf(-0.2));
        assert!((bivariate_cdf(0.3, -0.2, -1.0) - (cdf(0.3) + cdf(-0.2) - 1.0).max(0.0)).abs() < 1e-15);
        assert_eq!(bivariate_cdf(f64::NEG_INFINITY, 0.0, 0.5), 0.0);
        assert_eq!(bivariate_cdf(f64::INFINITY, 0.0, 0.5), 0.5);
    }
}
