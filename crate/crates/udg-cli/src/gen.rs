use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use udg_core::core_geom::{Point, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dist {
    UniformSquare,
    Clustered,
    GridJitter,
    Collinear,
}

impl std::str::FromStr for Dist {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform-square" | "uniform" => Ok(Dist::UniformSquare),
            "clustered" => Ok(Dist::Clustered),
            "grid-jitter" => Ok(Dist::GridJitter),
            "collinear" => Ok(Dist::Collinear),
            other => Err(format!(
                "unknown distribution {other:?} (uniform-square, clustered, grid-jitter, collinear)"
            )),
        }
    }
}

/// Deterministic per (n, distribution, seed). Coordinates live in a box of
/// side ~n so densities stay comparable across sizes.
pub fn gen_points(n: usize, dist: Dist, seed: u64, integer_mode: bool) -> PointSet {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let side = n.max(2) as f64;
    let coord = |rng: &mut ChaCha20Rng, lo: f64, hi: f64| -> f64 {
        if integer_mode {
            rng.gen_range(lo.floor() as i64..=hi.floor() as i64) as f64
        } else {
            rng.gen_range(lo..hi)
        }
    };
    let pts: Vec<Point> = match dist {
        Dist::UniformSquare => (0..n)
            .map(|_| {
                let x = coord(&mut rng, 0.0, side);
                let y = coord(&mut rng, 0.0, side);
                Point::new(x, y)
            })
            .collect(),
        Dist::Clustered => {
            let k = (n as f64).sqrt().ceil() as usize;
            let centers: Vec<(f64, f64)> = (0..k)
                .map(|_| (coord(&mut rng, 0.0, side), coord(&mut rng, 0.0, side)))
                .collect();
            let spread = side.sqrt().max(1.0);
            (0..n)
                .map(|i| {
                    let (cx, cy) = centers[i % k];
                    Point::new(
                        cx + coord(&mut rng, -spread, spread),
                        cy + coord(&mut rng, -spread, spread),
                    )
                })
                .collect()
        }
        Dist::GridJitter => {
            let cols = (n as f64).sqrt().ceil() as usize;
            (0..n)
                .map(|i| {
                    let (gx, gy) = ((i % cols) as f64, (i / cols) as f64);
                    Point::new(
                        8.0 * gx + coord(&mut rng, -2.0, 2.0),
                        8.0 * gy + coord(&mut rng, -2.0, 2.0),
                    )
                })
                .collect()
        }
        Dist::Collinear => (0..n).map(|i| Point::new(i as f64, 0.0)).collect(),
    };
    PointSet::new(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_and_determinism() {
        let ps = gen_points(5, Dist::Collinear, 99, false);
        for i in 0..5 {
            assert_eq!((ps.pts[i].x, ps.pts[i].y), (i as f64, 0.0));
        }
        for dist in [Dist::UniformSquare, Dist::Clustered, Dist::GridJitter] {
            let a = gen_points(64, dist, 7, true);
            let b = gen_points(64, dist, 7, true);
            assert_eq!(a.pts, b.pts);
            assert!(a.integer_mode);
            let c = gen_points(64, dist, 8, true);
            assert_ne!(a.pts, c.pts);
        }
    }

    #[test]
    fn uniform_stays_in_box() {
        let ps = gen_points(1000, Dist::UniformSquare, 3, false);
        assert!(ps.pts.iter().all(|p| (0.0..1000.0).contains(&p.x) && (0.0..1000.0).contains(&p.y)));
    }
}
