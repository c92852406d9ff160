//! Property-based invariants: conservation under discretization, refinement
//! invariance of line integrals, kernel algebra, and field linearity.

use abvac::fields::{vector_potential, FieldNumerics};
use abvac::kernels::{scalar_kernel, tensor_kernel, KernelMethod, PolarizationSet, QuadratureSpec};
use abvac::math::Vec3;
use abvac::model::{solenoid_to_loops, CircularLoop, CurrentSource, SampledPath, Solenoid};
use proptest::prelude::*;

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit_vec3() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter_map("nonzero direction", |v| v.normalized())
}

/// Midpoint-rule line integral of a vector field along a polyline.
fn polyline_line_integral(path: &SampledPath, field: impl Fn(Vec3) -> Vec3) -> f64 {
    path.samples
        .windows(2)
        .map(|w| field(0.5 * (w[0].r + w[1].r)).dot(w[1].r - w[0].r))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ampere_turns_conserved_for_any_loop_count(
        radius in 1e-3..0.5f64,
        length in 1e-2..5.0f64,
        turns_per_meter in 1.0..5e3f64,
        current in -20.0..20.0f64,
        n_loops in 1usize..400,
    ) {
        prop_assume!(current.abs() > 1e-6);
        let s = Solenoid::new(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            radius,
            length,
            turns_per_meter,
            current,
        )
        .unwrap();
        let loops = solenoid_to_loops(&s, n_loops).unwrap();
        prop_assert_eq!(loops.len(), n_loops);
        let total: f64 = loops.iter().map(|l| l.current).sum();
        let want = s.ampere_turns();
        prop_assert!(
            (total - want).abs() <= 1e-12 * want.abs(),
            "sum {} vs ampere-turns {}",
            total,
            want
        );
        // Evenly spaced loops spanning the length, symmetric about center.
        let dz = length / n_loops as f64;
        for (k, l) in loops.iter().enumerate() {
            let z_want = -0.5 * length + (k as f64 + 0.5) * dz;
            prop_assert!((l.center.z - z_want).abs() <= 1e-12 * length);
        }
    }

    #[test]
    fn resampling_preserves_linear_field_line_integrals(
        pts in proptest::collection::vec(vec3(2.0), 3..9),
        f0 in vec3(3.0),
        grad in proptest::collection::vec(-2.0..2.0f64, 9),
        max_seg in 0.02..0.7f64,
    ) {
        // Drop consecutive duplicates so the polyline is valid.
        let mut clean: Vec<Vec3> = Vec::new();
        for p in pts {
            if clean.last().is_none_or(|q: &Vec3| (*q - p).norm() > 1e-9) {
                clean.push(p);
            }
        }
        prop_assume!(clean.len() >= 2);
        let path = SampledPath::from_points(&clean, 0.0, 1.0, false).unwrap();
        // Affine field: the midpoint rule is exact per segment, so the
        // integral must be invariant under subdivision.
        let field = move |r: Vec3| {
            Vec3::new(
                f0.x + grad[0] * r.x + grad[1] * r.y + grad[2] * r.z,
                f0.y + grad[3] * r.x + grad[4] * r.y + grad[5] * r.z,
                f0.z + grad[6] * r.x + grad[7] * r.y + grad[8] * r.z,
            )
        };
        let coarse = polyline_line_integral(&path, &field);
        let fine = polyline_line_integral(&path.resample(max_seg).unwrap(), &field);
        let scale = coarse.abs().max(1.0);
        prop_assert!(
            (fine - coarse).abs() <= 1e-12 * scale,
            "coarse {} fine {}",
            coarse,
            fine
        );
    }

    #[test]
    fn resampling_preserves_geometry(
        pts in proptest::collection::vec(vec3(1.0), 2..8),
        max_seg in 0.01..0.5f64,
    ) {
        let mut clean: Vec<Vec3> = Vec::new();
        for p in pts {
            if clean.last().is_none_or(|q: &Vec3| (*q - p).norm() > 1e-9) {
                clean.push(p);
            }
        }
        prop_assume!(clean.len() >= 2);
        let path = SampledPath::from_points(&clean, 0.0, 3.0, false).unwrap();
        let fine = path.resample(max_seg).unwrap();
        prop_assert!((fine.arclength() - path.arclength()).abs() <= 1e-12 * path.arclength().max(1e-12));
        // Original vertices survive, including endpoints.
        for s in &path.samples {
            prop_assert!(fine.samples.iter().any(|f| f.r == s.r));
        }
        // Segment lengths respect the bound (with the fp slack).
        for w in fine.samples.windows(2) {
            prop_assert!((w[1].r - w[0].r).norm() <= max_seg * (1.0 + 1e-9));
        }
    }

    #[test]
    fn kernel_completeness_and_scaling(
        dir in unit_vec3(),
        log_r in -3.0..3.0f64,
        lambda in 0.01..100.0f64,
    ) {
        let spec = QuadratureSpec::default();
        let r_sep = 10f64.powf(log_r) * dir;
        let s = scalar_kernel(r_sep, KernelMethod::ClosedForm, &spec).unwrap();
        let tt = tensor_kernel(r_sep, PolarizationSet::TransverseOnly, KernelMethod::ClosedForm, &spec).unwrap();
        let tl = tensor_kernel(r_sep, PolarizationSet::LongitudinalOnly, KernelMethod::ClosedForm, &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { s } else { 0.0 };
                prop_assert!((tt.t[i][j] + tl.t[i][j] - want).abs() <= 1e-9 * s);
            }
        }
        // T(λR) = T(R)/λ.
        let t1 = tensor_kernel(r_sep, PolarizationSet::TransverseOnly, KernelMethod::ClosedForm, &spec).unwrap();
        let t2 = tensor_kernel(lambda * r_sep, PolarizationSet::TransverseOnly, KernelMethod::ClosedForm, &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((t2.t[i][j] - t1.t[i][j] / lambda).abs() <= 1e-12 * t1.max_abs_component() / lambda);
            }
        }
    }

    #[test]
    fn loop_potential_linear_in_current(
        current in -5.0..5.0f64,
        lambda in -3.0..3.0f64,
        probe in vec3(0.4),
    ) {
        prop_assume!(current.abs() > 1e-3 && lambda.abs() > 1e-3);
        let num = FieldNumerics::default();
        let base = CircularLoop::new(
            Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), 0.1, current,
        ).unwrap();
        let scaled = CircularLoop::new(
            Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), 0.1, current * lambda,
        ).unwrap();
        let d = abvac::fields::distance_to_current_source(
            &CurrentSource::CircularLoop(base), probe,
        );
        prop_assume!(d > 1e-3);
        let a1 = vector_potential(&[CurrentSource::CircularLoop(base)], probe, 1.0, &num).unwrap();
        let a2 = vector_potential(&[CurrentSource::CircularLoop(scaled)], probe, 1.0, &num).unwrap();
        prop_assert!((a2 - a1 * lambda).norm() <= 1e-12 * a1.norm().max(1e-30) * lambda.abs().max(1.0));
    }
}
