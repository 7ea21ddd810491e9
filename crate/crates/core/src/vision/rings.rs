//! Radial difference vectors and the three-ring consistency test.
//!
//! From a candidate center we walk outward in eight directions, record the
//! absolute intensity change between successive pixels, suppress everything
//! but local peaks, and require the first three peaks to sit near radii
//! `r, 2r, 3r`.
//!
//! Diagonal walks step one pixel in each axis, so index `k` lies at Euclidean
//! distance `k * sqrt(2)`. No correction is applied: the 1:2:3 test is checked
//! per direction against that direction's own radius estimate, which is scale
//! free. The pooled `r_avg` is therefore in "walk index" units and mixes the two
//! scales when diagonals are positive.

use super::{DetectorConfig, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
        Direction::UpLeft,
        Direction::UpRight,
        Direction::DownLeft,
        Direction::DownRight,
    ];

    /// Pixel step, image coordinates (y grows downward).
    pub fn step(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
            Direction::UpLeft => (-1, -1),
            Direction::UpRight => (1, -1),
            Direction::DownLeft => (-1, 1),
            Direction::DownRight => (1, 1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        let (dx, dy) = self.step();
        dx != 0 && dy != 0
    }
}

/// `|I(p_{i+1}) - I(p_i)|` along the ray, zeroed below `threshold`. The walk
/// stops early at the image border.
pub fn radial_difference_vector(
    img: &GrayImage,
    center: (usize, usize),
    direction: Direction,
    length: usize,
    threshold: u8,
) -> Vec<u8> {
    let (dx, dy) = direction.step();
    let (mut x, mut y) = (center.0 as i64, center.1 as i64);
    if !img.contains(x, y) {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(length);
    let mut prev = img.get(x as usize, y as usize);
    for _ in 0..length {
        x += dx;
        y += dy;
        if !img.contains(x, y) {
            break;
        }
        let cur = img.get(x as usize, y as usize);
        let d = prev.abs_diff(cur);
        out.push(if d < threshold { 0 } else { d });
        prev = cur;
    }
    out
}

/// Suppression half-width for a vector of `len` elements.
pub fn nms_window(len: usize, window_fraction: f64) -> usize {
    // The epsilon keeps e.g. 0.1 * 30 = 3.0000000000000004 from rounding up.
    (window_fraction * len as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Indices of local maxima. An index survives when its value is positive and
/// not exceeded anywhere within the window; on equal values the first index of
/// the plateau wins.
pub fn nms_1d(v: &[u8], window_fraction: f64) -> Vec<usize> {
    let w = nms_window(v.len(), window_fraction);
    let mut out = Vec::new();
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0 {
            continue;
        }
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(v.len() - 1);
        let before_ok = v[lo..i].iter().all(|&u| u < vi);
        let after_ok = v[i + 1..=hi].iter().all(|&u| u <= vi);
        if before_ok && after_ok {
            out.push(i);
        }
    }
    out
}

/// Radius estimate for one direction from its first three maxima, assuming the
/// rings sit at `r, 2r, 3r`.
pub fn direction_radius(m: &[usize]) -> Option<f64> {
    if m.len() < 3 {
        return None;
    }
    Some((m[0] as f64 + m[1] as f64 / 2.0 + m[2] as f64 / 3.0) / 3.0)
}

/// Whether one direction's maxima fit the 1:2:3 model within tolerance.
pub fn direction_is_positive(m: &[usize], radius_tolerance: f64) -> bool {
    let Some(r) = direction_radius(m) else {
        return false;
    };
    m.iter()
        .take(3)
        .enumerate()
        .all(|(k, &mk)| (mk as f64 - (k + 1) as f64 * r).abs() <= radius_tolerance * r)
}

/// Outcome of the eight-direction vote.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentricEvidence {
    pub positive_directions: usize,
    pub r_avg: f64,
    pub positive: [bool; 8],
}

pub fn validate_concentric(
    maxima_per_direction: &[Vec<usize>; 8],
    cfg: &DetectorConfig,
) -> Option<ConcentricEvidence> {
    let mut positive = [false; 8];
    let mut radii = Vec::with_capacity(8);
    for (i, m) in maxima_per_direction.iter().enumerate() {
        if direction_is_positive(m, cfg.radius_tolerance) {
            positive[i] = true;
            radii.extend(direction_radius(m));
        }
    }
    if radii.len() < cfg.min_positive_directions {
        return None;
    }
    Some(ConcentricEvidence {
        positive_directions: radii.len(),
        r_avg: median(&mut radii),
        positive,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> DetectorConfig {
        DetectorConfig::default()
    }

    #[test]
    fn constant_image_gives_zero_differences() {
        let img = GrayImage::filled(50, 50, 90).unwrap();
        for d in Direction::ALL {
            let v = radial_difference_vector(&img, (25, 25), d, 20, 40);
            assert_eq!(v.len(), 20);
            assert!(v.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn step_edge_lands_at_k_minus_one() {
        let mut img = GrayImage::filled(40, 5, 0).unwrap();
        let k = 7;
        for y in 0..5 {
            for x in 10 + k..40 {
                img.set(x, y, 255);
            }
        }
        let v = radial_difference_vector(&img, (10, 2), Direction::Right, 20, 40);
        let mut expected = vec![0u8; 20];
        expected[k - 1] = 255;
        assert_eq!(v, expected);
    }

    #[test]
    fn sub_threshold_ramp_is_zeroed() {
        let data = (0..25u8).map(|x| x * 10).collect();
        let img = GrayImage::new(25, 1, data).unwrap();
        let v = radial_difference_vector(&img, (0, 0), Direction::Right, 24, 40);
        assert_eq!(v, vec![0; 24]);
    }

    #[test]
    fn walk_truncates_at_border() {
        let img = GrayImage::filled(10, 10, 0).unwrap();
        assert_eq!(
            radial_difference_vector(&img, (2, 2), Direction::UpLeft, 50, 40).len(),
            2
        );
        assert_eq!(
            radial_difference_vector(&img, (2, 2), Direction::Right, 50, 40).len(),
            7
        );
    }

    #[test]
    fn nms_examples() {
        assert!(nms_1d(&[0; 10], 0.1).is_empty());
        assert_eq!(nms_1d(&[0, 0, 90, 0, 0, 0, 0, 0, 0, 70], 0.1), vec![2, 9]);
        assert_eq!(nms_1d(&[50, 50], 0.1), vec![0]);
    }

    #[test]
    fn window_width_is_not_inflated_by_rounding() {
        assert_eq!(nms_window(30, 0.1), 3);
        assert_eq!(nms_window(120, 0.1), 12);
        assert_eq!(nms_window(10, 0.1), 1);
        assert_eq!(nms_window(11, 0.1), 2);
    }

    #[test]
    fn exact_spacing_is_positive_everywhere() {
        let m: [Vec<usize>; 8] = std::array::from_fn(|_| vec![15, 30, 45]);
        let ev = validate_concentric(&m, &cfg()).unwrap();
        assert_eq!(ev.positive_directions, 8);
        assert_eq!(ev.r_avg, 15.0);
    }

    #[test]
    fn four_of_eight_is_not_enough() {
        let m: [Vec<usize>; 8] =
            std::array::from_fn(|i| if i < 4 { vec![15, 30, 45] } else { vec![15] });
        assert_eq!(validate_concentric(&m, &cfg()), None);
    }

    #[test]
    fn misplaced_third_ring_is_negative() {
        assert!(!direction_is_positive(&[15, 30, 80], 0.5));
        assert!(direction_is_positive(&[15, 30, 45], 0.5));
    }

    proptest! {
        #[test]
        fn nms_output_is_increasing_and_nonzero(
            v in proptest::collection::vec(any::<u8>(), 1..200),
            frac in 0.01f64..0.99
        ) {
            let idx = nms_1d(&v, frac);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(idx.iter().all(|&i| v[i] > 0));
        }

        #[test]
        fn lowering_min_positive_never_loses_a_detection(
            maxima in proptest::collection::vec(proptest::collection::vec(0usize..120, 0..5), 8),
            min in 1usize..=8
        ) {
            let m: [Vec<usize>; 8] = std::array::from_fn(|i| {
                let mut v = maxima[i].clone();
                v.sort_unstable();
                v.dedup();
                v
            });
            let strict = DetectorConfig { min_positive_directions: min, ..cfg() };
            let loose = DetectorConfig { min_positive_directions: min.saturating_sub(1).max(1), ..cfg() };
            if validate_concentric(&m, &strict).is_some() {
                prop_assert!(validate_concentric(&m, &loose).is_some());
            }
        }
    }
}
