use std::f64::consts::TAU;

use circlesym::flow::ParamCurve;
use circlesym::forms::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `t ↦ base + t·z + amplitude·Σⱼ (aⱼ sin 2πjt + bⱼ(cos 2πjt − 1))/j`
/// with `aⱼ, bⱼ` uniform in `[−1, 1]³` drawn from `seed`.
pub fn wiggly_loop(
    base: Point,
    homology: [i64; 3],
    amplitude: f64,
    harmonics: usize,
    seed: u64,
    samples: usize,
) -> Result<ParamCurve, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> [f64; 3] { std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)) };
    let terms: Vec<([f64; 3], [f64; 3])> = (0..harmonics).map(|_| (draw(), draw())).collect();
    ParamCurve::from_lifted_fn(samples, |t| {
        let mut p: Point = std::array::from_fn(|i| base[i] + t * homology[i] as f64);
        for (j, (a, b)) in terms.iter().enumerate() {
            let n = (j + 1) as f64;
            let (s, c) = (TAU * n * t).sin_cos();
            for i in 0..3 {
                p[i] += amplitude * (a[i] * s + b[i] * (c - 1.0)) / n;
            }
        }
        p
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_loop() {
        let a = wiggly_loop([0.1, 0.2, 0.3], [1, 0, 0], 0.1, 3, 5, 64).unwrap();
        let b = wiggly_loop([0.1, 0.2, 0.3], [1, 0, 0], 0.1, 3, 5, 64).unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(a.homology(), [1, 0, 0]);
        let c = wiggly_loop([0.1, 0.2, 0.3], [1, 0, 0], 0.1, 3, 6, 64).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn starts_at_base() {
        let a = wiggly_loop([0.1, 0.2, 0.3], [0, 1, -1], 0.2, 4, 1, 32).unwrap();
        assert_eq!(a.points()[0], [0.1, 0.2, 0.3]);
        assert_eq!(a.homology(), [0, 1, -1]);
    }
}
