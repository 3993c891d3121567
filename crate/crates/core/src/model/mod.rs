//! The manifold VAR model with mean reversion towards an attractor `S*`:
//! `S_{k+1} = Exp_{S_k}(Σ_ℓ A_ℓ Γ(V_{k−ℓ}) + B Log_{S_k}(S*) + ε_k)`.

mod dataset;
mod params;
mod series;
mod simulate;

pub use dataset::{build_dataset, extract_directions, DatasetRow, TangentDataset};
pub use params::{DiagParams, ModelKind, ModelParams, ScalarParams};
pub use series::{CovSeries, SeriesMeta};
pub use simulate::simulate;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Geometry, SpdPoint, SymMatrix};
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn star() -> SpdPoint<f64> {
        SpdPoint::from_row_slice(2, &[2.0, 0.3, 0.3, 1.0]).unwrap()
    }

    fn scalar(alpha: Vec<f64>, beta: f64, sigma: f64, g: Geometry) -> ModelParams<f64> {
        ScalarParams {
            alpha,
            beta,
            sigma,
            attractor: star(),
            geometry: g,
        }
        .into()
    }

    #[test]
    fn no_drift_no_noise_is_constant() {
        let s0 = SpdPoint::from_diagonal(&[1.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = simulate(
            &scalar(vec![0.0], 0.0, 0.0, Geometry::AffineInvariant),
            &[s0.clone(), s0.clone()],
            10,
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.len(), 10);
        for x in out.points() {
            assert!((x.matrix().as_matrix() - s0.matrix().as_matrix()).norm() < 1e-13);
        }
    }

    #[test]
    fn full_reversion_jumps_to_attractor() {
        let s0 = SpdPoint::from_diagonal(&[1.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for g in [Geometry::Euclidean, Geometry::AffineInvariant] {
            let out = simulate(
                &scalar(vec![], 1.0, 0.0, g),
                std::slice::from_ref(&s0),
                6,
                &mut rng,
            )
            .unwrap();
            for x in &out.points()[1..] {
                assert!((x.matrix().as_matrix() - star().matrix().as_matrix()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_autoregression_continues_geodesic() {
        let g = Geometry::AffineInvariant;
        let s0 = SpdPoint::from_diagonal(&[1.0, 3.0]).unwrap();
        let v = SymMatrix::from_row_slice(2, &[0.2, 0.1, 0.1, -0.1]).unwrap();
        let s1 = g.exp_map(&s0, &v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = simulate(&scalar(vec![1.0], 0.0, 0.0, g), &[s0, s1], 12, &mut rng).unwrap();
        let pts = out.points();
        let d0 = g.dist(&pts[0], &pts[1]).unwrap();
        for w in pts.windows(2) {
            assert!((g.dist(&w[0], &w[1]).unwrap() - d0).abs() < 1e-8);
        }
    }

    #[test]
    fn seeded_runs_repeat_bit_for_bit() {
        let s0 = SpdPoint::from_diagonal(&[1.0, 3.0]).unwrap();
        let params = scalar(vec![-0.3], 0.2, 0.05, Geometry::AffineInvariant);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            simulate(&params, &[s0.clone(), s0.clone()], 50, &mut rng).unwrap()
        };
        let (a, b) = (run(9), run(9));
        for (x, y) in a.points().iter().zip(b.points()) {
            assert_eq!(x.matrix().row_major(), y.matrix().row_major());
        }
    }

    #[test]
    fn euclidean_exit_is_flagged() {
        let s0 = SpdPoint::from_diagonal(&[0.05, 0.05]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = simulate(
            &scalar(vec![], 0.0, 0.5, Geometry::Euclidean),
            &[s0],
            40,
            &mut rng,
        )
        .unwrap();
        assert!(!out.meta.not_pd_steps.is_empty());
        for &k in &out.meta.not_pd_steps {
            assert!(!out.points()[k].is_pd());
        }
    }

    #[test]
    fn diagonal_drift_is_componentwise() {
        let params: ModelParams<f64> = DiagParams {
            a: DMatrix::from_row_slice(1, 3, &[0.5, -1.0, 2.0]),
            b: DVector::from_vec(vec![1.0, 0.0, 0.5]),
            sigma: DVector::from_vec(vec![0.1, 0.1, 0.1]),
            attractor: star(),
            geometry: Geometry::AffineInvariant,
        }
        .into();
        params.validate().unwrap();
        let d = params.drift(
            &[DVector::from_vec(vec![1.0, 1.0, 1.0])],
            &DVector::from_vec(vec![2.0, 2.0, 2.0]),
        );
        assert_eq!(d.as_slice(), &[2.5, -1.0, 3.0]);
        assert!(matches!(
            simulate(&params, &[star()], 5, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(crate::Error::InsufficientData { .. })
        ));
    }
}
