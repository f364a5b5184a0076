//! sRGB → CIELAB conversion (D65 white, 2° observer) and the individual
//! typology angle, the scalar skin-tone measure computed from L* and b*.

use serde::{Deserialize, Serialize};

/// CIELAB color. L* is perceptual lightness in [0, 100] for colors
/// converted from valid sRGB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    pub l_star: f64,
    pub a_star: f64,
    pub b_star: f64,
}

// Linear sRGB → XYZ (D65), derived exactly from the IEC 61966-2-1
// primaries so each row sums to the white point.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_439_089_692_1, 0.357_576_077_643_909_0, 0.180_437_483_266_398_9],
    [0.212_672_851_405_622_5, 0.715_152_155_287_817_9, 0.072_174_993_306_559_6],
    [0.019_333_895_582_329_3, 0.119_192_025_881_303_0, 0.950_304_078_536_367_7],
];

// D65 reference white.
const WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

fn inverse_compand(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Conversion over continuous channel values in [0, 255]; smoothed pixels
/// keep fractional channels.
pub fn srgb_channels_to_lab(r: f64, g: f64, b: f64) -> LabColor {
    let lin = [
        inverse_compand(r / 255.0),
        inverse_compand(g / 255.0),
        inverse_compand(b / 255.0),
    ];
    let mut xyz = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        xyz[i] = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    LabColor {
        l_star: 116.0 * fy - 16.0,
        a_star: 500.0 * (fx - fy),
        b_star: 200.0 * (fy - fz),
    }
}

/// Standard sRGB (D65, 2° observer) to CIELAB conversion of an 8-bit color.
pub fn srgb_to_lab(rgb: [u8; 3]) -> LabColor {
    srgb_channels_to_lab(rgb[0] as f64, rgb[1] as f64, rgb[2] as f64)
}

/// Individual typology angle in degrees: arctan((L* − 50)/b*) · 180/π.
///
/// At the b* = 0 singularity the arctan limit is taken: ±90° by the sign of
/// L* − 50, and 0 at the doubly degenerate point L* = 50, b* = 0.
pub fn ita(lab: LabColor) -> f64 {
    let numerator = lab.l_star - 50.0;
    if lab.b_star == 0.0 {
        if numerator == 0.0 {
            0.0
        } else {
            90.0_f64.copysign(numerator)
        }
    } else {
        (numerator / lab.b_star).atan().to_degrees()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn white_maps_to_reference_white() {
        let lab = srgb_to_lab([255, 255, 255]);
        close(lab.l_star, 100.0, 1e-6);
        close(lab.a_star, 0.0, 1e-6);
        close(lab.b_star, 0.0, 1e-6);
    }

    #[test]
    fn black_maps_to_origin() {
        let lab = srgb_to_lab([0, 0, 0]);
        close(lab.l_star, 0.0, 1e-9);
        close(lab.a_star, 0.0, 1e-9);
        close(lab.b_star, 0.0, 1e-9);
    }

    #[test]
    fn red_matches_published_values() {
        // CIELAB of sRGB red under D65/2°, cross-checked to 3 decimals
        let lab = srgb_to_lab([255, 0, 0]);
        close(lab.l_star, 53.2408, 1e-3);
        close(lab.a_star, 80.0925, 1e-3);
        close(lab.b_star, 67.2032, 1e-3);
    }

    #[test]
    fn ita_anchors() {
        let at = |l_star: f64, b_star: f64| {
            ita(LabColor {
                l_star,
                a_star: 0.0,
                b_star,
            })
        };
        assert_eq!(at(50.0, 10.0), 0.0);
        close(at(60.0, 10.0), 45.0, 1e-12);
        close(at(40.0, 10.0), -45.0, 1e-12);
    }

    #[test]
    fn ita_singularity_takes_limit_values() {
        let at = |l_star: f64, b_star: f64| {
            ita(LabColor {
                l_star,
                a_star: 0.0,
                b_star,
            })
        };
        assert_eq!(at(80.0, 0.0), 90.0);
        assert_eq!(at(20.0, 0.0), -90.0);
        assert_eq!(at(50.0, 0.0), 0.0);
    }

    #[test]
    fn ita_monotone_in_lightness() {
        let mut last = f64::NEG_INFINITY;
        for i in 0..100 {
            let l = i as f64;
            let v = ita(LabColor {
                l_star: l,
                a_star: 0.0,
                b_star: 15.0,
            });
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn round_trip_through_inverse_conversion() {
        // hand-rolled inverse, used only to check the forward map
        fn lab_to_srgb(lab: LabColor) -> [f64; 3] {
            let fy = (lab.l_star + 16.0) / 116.0;
            let fx = fy + lab.a_star / 500.0;
            let fz = fy - lab.b_star / 200.0;
            let finv = |t: f64| {
                const DELTA: f64 = 6.0 / 29.0;
                if t > DELTA {
                    t * t * t
                } else {
                    3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
                }
            };
            let xyz = [finv(fx) * WHITE[0], finv(fy) * WHITE[1], finv(fz) * WHITE[2]];
            const XYZ_TO_RGB: [[f64; 3]; 3] = [
                [3.240_454_2, -1.537_138_5, -0.498_531_4],
                [-0.969_266_0, 1.876_010_8, 0.041_556_0],
                [0.055_643_4, -0.204_025_9, 1.057_225_2],
            ];
            let mut rgb = [0.0; 3];
            for (i, row) in XYZ_TO_RGB.iter().enumerate() {
                let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
                let c = if lin <= 0.003_130_8 {
                    12.92 * lin
                } else {
                    1.055 * lin.max(0.0).powf(1.0 / 2.4) - 0.055
                };
                rgb[i] = c * 255.0;
            }
            rgb
        }

        for &r in &[0u8, 128, 255] {
            for &g in &[0u8, 128, 255] {
                for &b in &[0u8, 128, 255] {
                    let lab = srgb_to_lab([r, g, b]);
                    let back = lab_to_srgb(lab);
                    close(back[0], r as f64, 0.5);
                    close(back[1], g as f64, 0.5);
                    close(back[2], b as f64, 0.5);
                }
            }
        }
    }
}
