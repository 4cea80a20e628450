#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use nalgebra::Matrix4;
use proptest::prelude::*;

use rpe_core::eigen::{eigenframe, eigenvalues};
use rpe_core::ptm::{
    gate_ptm, outcome_probability, ptm_from_axis_angle, EffectVec, Gate, GateParams, Mat4, Ptm,
    StateVec,
};

fn to_na(m: &Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn from_na(m: &Matrix4<f64>) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    out
}

fn unit_axis() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        })
}

fn gate_params() -> impl Strategy<Value = GateParams> {
    (0.0..2.0 * PI, 0.0..2.0 * PI, -0.5..0.5f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(
        |(x_angle, y_angle, y_tilt, depol_x, depol_y)| GateParams {
            x_angle,
            y_angle,
            y_tilt,
            depol_x,
            depol_y,
        },
    )
}

fn bloch_ball() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("inside ball", |v| v.iter().map(|x| x * x).sum::<f64>() <= 1.0)
}

fn circuit() -> impl Strategy<Value = Vec<Gate>> {
    prop::collection::vec(prop_oneof![Just(Gate::Gx), Just(Gate::Gy)], 0..40)
}

proptest! {
    #[test]
    fn constructors_are_trace_preserving(axis in unit_axis(), angle in -10.0..10.0f64, p in gate_params(), s in 0.0..=1.0f64) {
        let row = [1.0, 0.0, 0.0, 0.0];
        prop_assert_eq!(ptm_from_axis_angle(axis, angle).unwrap().entries()[0], row);
        prop_assert_eq!(gate_ptm(&p, Gate::Gx).unwrap().entries()[0], row);
        prop_assert_eq!(gate_ptm(&p, Gate::Gy).unwrap().entries()[0], row);
        prop_assert_eq!(Ptm::depolarizing(s).unwrap().entries()[0], row);
    }

    #[test]
    fn unitary_bloch_block_is_orthogonal(axis in unit_axis(), angle in -10.0..10.0f64) {
        let b = ptm_from_axis_angle(axis, angle).unwrap().bloch_block();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| b[k][i] * b[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-12, "BᵀB[{i}][{j}] = {dot}");
            }
        }
    }

    #[test]
    fn eigenphase_round_trip_in_real_frames(
        r in 0.5..=1.0f64,
        phi in 1e-6..PI,
        d in -0.95..0.95f64,
        frame in prop::array::uniform16(-1.0..1.0f64),
    ) {
        let s = Matrix4::from_row_slice(&frame);
        let sv = s.svd(false, false).singular_values;
        prop_assume!(sv.min() > 0.0 && sv.max() / sv.min() < 100.0);
        let (sn, cs) = phi.sin_cos();
        let block = Matrix4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, r * cs, -r * sn, 0.0,
            0.0, r * sn, r * cs, 0.0,
            0.0, 0.0, 0.0, d,
        );
        let m = from_na(&(s * block * s.try_inverse().unwrap()));
        let f = eigenframe(&m).unwrap();
        prop_assert!((f.r - r).abs() <= 1e-10, "r {} vs {}", f.r, r);
        prop_assert!((f.phi - phi).abs() <= 1e-10, "φ {} vs {}", f.phi, phi);
        prop_assert!((f.d - d).abs() <= 1e-10, "d {} vs {}", f.d, d);
        prop_assert!((f.unity - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn eigenframe_diagonalizes(p in gate_params(), gate in prop_oneof![Just(Gate::Gx), Just(Gate::Gy)]) {
        let g = gate_ptm(&p, gate).unwrap();
        prop_assume!(p.depol_x > 0.2 && p.depol_y > 0.2);
        let Ok(f) = g.eigenframe() else { return Ok(()) };
        let t = f.transform(g.entries());
        let ev = f.eigenvalues();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { ev[i] } else { 0.0.into() };
                prop_assert!((t[i][j] - want).norm() <= 1e-8, "entry ({i},{j}) = {}", t[i][j]);
            }
        }
    }

    #[test]
    fn eigenvalues_match_generic_solver(p in gate_params(), gate in prop_oneof![Just(Gate::Gx), Just(Gate::Gy)]) {
        let g = gate_ptm(&p, gate).unwrap();
        let mut ours: Vec<(f64, f64)> = eigenvalues(g.entries()).unwrap().iter().map(|z| (z.re, z.im)).collect();
        let mut oracle: Vec<(f64, f64)> = to_na(g.entries()).complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        let key = |a: &(f64, f64), b: &(f64, f64)| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap();
        ours.sort_by(key);
        oracle.sort_by(key);
        // a real pair can split either way; match greedily by distance
        for z in &ours {
            let best = oracle
                .iter()
                .map(|w| ((z.0 - w.0).powi(2) + (z.1 - w.1).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-7, "eigenvalue {z:?} not in {oracle:?}");
        }
    }

    #[test]
    fn probability_closure(p in gate_params(), gates in circuit(), prep in bloch_ball()) {
        let circuit: Vec<Ptm> = gates.iter().map(|&g| gate_ptm(&p, g).unwrap()).collect();
        let state = StateVec::from_bloch(prep).unwrap();
        let p0 = outcome_probability(&EffectVec::proj_zero(), &circuit, &state).unwrap();
        let p1 = outcome_probability(&EffectVec::proj_one(), &circuit, &state).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn repeated_rotation_matches_closed_form(theta in 0.0..2.0 * PI, surv in 0.9..=1.0f64, k in 0usize..200) {
        let params = GateParams { x_angle: theta, depol_x: surv, ..GateParams::ideal() };
        let g = gate_ptm(&params, Gate::Gx).unwrap();
        let circuit = vec![g; k];
        let p1 = outcome_probability(&EffectVec::proj_one(), &circuit, &StateVec::zero()).unwrap();
        // Bloch z of |0⟩ after k contracted rotations about x is surv^k cos(kθ)
        let want = (1.0 - surv.powi(k as i32) * (k as f64 * theta).cos()) / 2.0;
        prop_assert!((p1 - want).abs() <= 1e-10, "{p1} vs {want}");
        let pow = g.power(k);
        let p_pow = outcome_probability(&EffectVec::proj_one(), &[pow], &StateVec::zero()).unwrap();
        prop_assert!((p_pow - want).abs() <= 1e-10);
    }
}

#[test]
fn ideal_gates_have_quarter_turn_phase() {
    for gate in [Gate::Gx, Gate::Gy] {
        let f = gate_ptm(&GateParams::ideal(), gate).unwrap().eigenframe().unwrap();
        assert!((f.phi - PI / 2.0).abs() <= 1e-12);
        assert!((f.r - 1.0).abs() <= 1e-12);
    }
}
