//! Single-qubit states, effects and CPTP maps in the Pauli-Liouville picture.
//!
//! Vectors use the basis order (I, X, Y, Z) with the `1/√2` normalisation, so a
//! state `ρ` maps to `tr(ρ P_i)/√2` and an effect `M` to `tr(M P_i)/√2`. With
//! that convention `tr(M 𝓔(ρ))` is the plain dot product `effect · (PTM · state)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eigen::{self, EigenFrame};
use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];

const AXIS_NORM_TOL: f64 = 1e-12;
const PROBABILITY_SLACK: f64 = 1e-9;

/// Native gate labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    Gx,
    Gy,
}

impl Gate {
    pub fn label(self) -> &'static str {
        match self {
            Gate::Gx => "Gx",
            Gate::Gy => "Gy",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Pauli transfer matrix of a trace-preserving single-qubit map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ptm {
    entries: Mat4,
}

impl Ptm {
    pub fn identity() -> Self {
        let mut entries = [[0.0; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Ptm { entries }
    }

    /// Builds a PTM from raw entries. The first row must be exactly `(1, 0, 0, 0)`.
    pub fn from_entries(entries: Mat4) -> Result<Self> {
        if entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("PTM entries must be finite"));
        }
        if entries[0] != [1.0, 0.0, 0.0, 0.0] {
            return Err(Error::invalid(format!(
                "PTM first row must be (1, 0, 0, 0), got {:?}",
                entries[0]
            )));
        }
        Ok(Ptm { entries })
    }

    /// Uniform Bloch contraction `diag(1, p, p, p)`.
    pub fn depolarizing(survival: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&survival) {
            return Err(Error::invalid(format!(
                "depolarization survival {survival} outside [0, 1]"
            )));
        }
        let mut m = Ptm::identity();
        for i in 1..4 {
            m.entries[i][i] = survival;
        }
        Ok(m)
    }

    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    /// The 3×3 block acting on Bloch coordinates.
    pub fn bloch_block(&self) -> [[f64; 3]; 3] {
        let mut b = [[0.0; 3]; 3];
        for (i, row) in b.iter_mut().enumerate() {
            row.copy_from_slice(&self.entries[i + 1][1..4]);
        }
        b
    }

    /// `self` followed by `next`, i.e. the matrix product `next · self`.
    pub fn then(&self, next: &Ptm) -> Ptm {
        Ptm {
            entries: matmul(&next.entries, &self.entries),
        }
    }

    pub fn apply(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(self.entries.iter()) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `self` applied `k` times, by repeated squaring.
    pub fn power(&self, mut k: usize) -> Ptm {
        let mut acc = Ptm::identity();
        let mut base = *self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            k >>= 1;
        }
        acc
    }

    pub fn eigenframe(&self) -> Result<EigenFrame> {
        eigen::eigenframe(&self.entries)
    }
}

/// Composition in operation order: returns `then · first`.
pub fn compose(first: &Ptm, then: &Ptm) -> Ptm {
    first.then(then)
}

pub(crate) fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// PTM of the unitary `exp(-i (angle/2) axis·σ)`, a right-handed Bloch rotation.
pub fn ptm_from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Ptm> {
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > AXIS_NORM_TOL {
        return Err(Error::invalid(format!(
            "rotation axis must have unit norm, got {norm}"
        )));
    }
    if !angle.is_finite() {
        return Err(Error::invalid("rotation angle must be finite"));
    }
    let [nx, ny, nz] = axis;
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    // Rodrigues: R = c·I + s·[n]× + (1 - c)·n nᵀ
    let rot = [
        [c + t * nx * nx, t * nx * ny - s * nz, t * nx * nz + s * ny],
        [t * ny * nx + s * nz, c + t * ny * ny, t * ny * nz - s * nx],
        [t * nz * nx - s * ny, t * nz * ny + s * nx, c + t * nz * nz],
    ];
    let mut m = Ptm::identity();
    for i in 0..3 {
        m.entries[i + 1][1..4].copy_from_slice(&rot[i]);
    }
    Ok(m)
}

/// Physical parameters of the `Gx`, `Gy` gate pair.
///
/// Angles are full rotation angles (ideal `π/2`); the rotation errors are
/// `x_angle - π/2` and `y_angle - π/2`. The Y gate rotates about
/// `(sin y_tilt, cos y_tilt, 0)`. Survivals are per-application Bloch
/// contractions, `1` meaning no depolarization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub x_angle: f64,
    pub y_angle: f64,
    pub y_tilt: f64,
    pub depol_x: f64,
    pub depol_y: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams::ideal()
    }
}

impl GateParams {
    pub fn ideal() -> Self {
        GateParams {
            x_angle: std::f64::consts::FRAC_PI_2,
            y_angle: std::f64::consts::FRAC_PI_2,
            y_tilt: 0.0,
            depol_x: 1.0,
            depol_y: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("x_angle", self.x_angle),
            ("y_angle", self.y_angle),
            ("y_tilt", self.y_tilt),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("depol_x", self.depol_x), ("depol_y", self.depol_y)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Full rotation angle of the given gate.
    pub fn angle(&self, gate: Gate) -> f64 {
        match gate {
            Gate::Gx => self.x_angle,
            Gate::Gy => self.y_angle,
        }
    }
}

pub fn gate_ptm(params: &GateParams, gate: Gate) -> Result<Ptm> {
    params.validate()?;
    let (axis, angle, survival) = match gate {
        Gate::Gx => ([1.0, 0.0, 0.0], params.x_angle, params.depol_x),
        Gate::Gy => {
            let (s, c) = params.y_tilt.sin_cos();
            // renormalise so tilt rounding cannot trip the unit-axis check
            let n = (s * s + c * c).sqrt();
            ([s / n, c / n, 0.0], params.y_angle, params.depol_y)
        }
    };
    let rot = ptm_from_axis_angle(axis, angle)?;
    Ok(rot.then(&Ptm::depolarizing(survival)?))
}

/// Pauli-Liouville vector of a single-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVec {
    coords: [f64; 4],
}

impl StateVec {
    /// State with Bloch vector `r`, `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "Bloch vector norm {norm} exceeds 1"
            )));
        }
        Ok(StateVec {
            coords: [
                FRAC_1_SQRT_2,
                r[0] * FRAC_1_SQRT_2,
                r[1] * FRAC_1_SQRT_2,
                r[2] * FRAC_1_SQRT_2,
            ],
        })
    }

    pub fn from_coords(coords: [f64; 4]) -> Result<Self> {
        if (coords[0] - FRAC_1_SQRT_2).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "state identity coordinate must be 1/√2, got {}",
                coords[0]
            )));
        }
        Self::from_bloch([
            coords[1] / FRAC_1_SQRT_2,
            coords[2] / FRAC_1_SQRT_2,
            coords[3] / FRAC_1_SQRT_2,
        ])
    }

    pub fn zero() -> Self {
        StateVec {
            coords: [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
        }
    }

    pub fn one() -> Self {
        StateVec {
            coords: [FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2],
        }
    }

    pub fn plus() -> Self {
        StateVec {
            coords: [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0],
        }
    }

    pub fn coords(&self) -> &[f64; 4] {
        &self.coords
    }

    pub fn bloch(&self) -> [f64; 3] {
        [
            self.coords[1] / FRAC_1_SQRT_2,
            self.coords[2] / FRAC_1_SQRT_2,
            self.coords[3] / FRAC_1_SQRT_2,
        ]
    }
}

/// Pauli-Liouville covector of a two-outcome measurement effect `0 ≤ M ≤ I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectVec {
    coords: [f64; 4],
}

impl EffectVec {
    /// Effect `M = a·I + b·σ`. Requires `0 ≤ a ± |b| ≤ 1`.
    pub fn from_pauli(a: f64, b: [f64; 3]) -> Result<Self> {
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (lo, hi) = (a - bn, a + bn);
        if !(lo.is_finite() && hi.is_finite()) || lo < -1e-12 || hi > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "effect eigenvalues ({lo}, {hi}) outside [0, 1]"
            )));
        }
        let s = std::f64::consts::SQRT_2;
        Ok(EffectVec {
            coords: [a * s, b[0] * s, b[1] * s, b[2] * s],
        })
    }

    /// `|0⟩⟨0|`
    pub fn proj_zero() -> Self {
        EffectVec {
            coords: [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
        }
    }

    /// `|1⟩⟨1|`
    pub fn proj_one() -> Self {
        EffectVec {
            coords: [FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2],
        }
    }

    /// `|+⟩⟨+|`
    pub fn m_x() -> Self {
        EffectVec {
            coords: [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0],
        }
    }

    /// `|+i⟩⟨+i|`
    pub fn m_y() -> Self {
        EffectVec {
            coords: [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0],
        }
    }

    pub fn coords(&self) -> &[f64; 4] {
        &self.coords
    }

    /// The complementary effect `I - M`.
    pub fn complement(&self) -> Self {
        let s = std::f64::consts::SQRT_2;
        EffectVec {
            coords: [
                s - self.coords[0],
                -self.coords[1],
                -self.coords[2],
                -self.coords[3],
            ],
        }
    }

    pub fn dot(&self, v: &[f64; 4]) -> f64 {
        self.coords.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// `⟪effect| 𝓔_n ⋯ 𝓔_1 |prep⟫` for `circuit = [𝓔_1, …, 𝓔_n]` in operation order.
///
/// Values within `1e-9` outside `[0, 1]` are clamped; anything further out is
/// an error.
pub fn outcome_probability(effect: &EffectVec, circuit: &[Ptm], prep: &StateVec) -> Result<f64> {
    let v = circuit
        .iter()
        .fold(prep.coords, |acc, gate| gate.apply(&acc));
    clamp_probability(effect.dot(&v))
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::InvalidProbability { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Trace distance `½‖ρ_a − ρ_b‖₁`.
///
/// For qubits this is half the Euclidean distance between Bloch vectors. The
/// stored coordinates are Bloch components divided by `√2`, so the distance
/// is `‖Δcoords‖/√2`; `|0⟩` against `|1⟩` gives exactly 1.
pub fn trace_distance(a: &StateVec, b: &StateVec) -> f64 {
    let d2: f64 = (1..4)
        .map(|i| (a.coords[i] - b.coords[i]).powi(2))
        .sum();
    (d2.sqrt() * FRAC_1_SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_mat_eq(a: &Mat4, b: &Mat4, tol: f64) {
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(a[i][j], b[i][j], epsilon = tol);
            }
        }
    }

    #[test]
    fn x_rotation_quarter_turn() {
        let m = ptm_from_axis_angle([1.0, 0.0, 0.0], FRAC_PI_2).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        assert_mat_eq(m.entries(), &expected, 1e-15);
    }

    #[test]
    fn y_rotation_quarter_turn() {
        let m = ptm_from_axis_angle([0.0, 1.0, 0.0], FRAC_PI_2).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ];
        assert_mat_eq(m.entries(), &expected, 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let axis = [0.6, 0.0, 0.8];
        let m = ptm_from_axis_angle(axis, 0.0).unwrap();
        assert_eq!(m, Ptm::identity());
    }

    #[test]
    fn non_unit_axis_rejected() {
        let err = ptm_from_axis_angle([1.0, 1.0, 0.0], 0.3).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn gate_ptm_matches_axis_angle() {
        let p = GateParams::ideal();
        assert_eq!(
            gate_ptm(&p, Gate::Gx).unwrap(),
            ptm_from_axis_angle([1.0, 0.0, 0.0], FRAC_PI_2).unwrap()
        );
        assert_mat_eq(
            gate_ptm(&p, Gate::Gy).unwrap().entries(),
            ptm_from_axis_angle([0.0, 1.0, 0.0], FRAC_PI_2)
                .unwrap()
                .entries(),
            1e-15,
        );
    }

    #[test]
    fn depolarized_gate_scales_bloch_block() {
        let p = GateParams {
            depol_x: 0.9,
            ..GateParams::ideal()
        };
        let noisy = gate_ptm(&p, Gate::Gx).unwrap();
        let clean = gate_ptm(&GateParams::ideal(), Gate::Gx).unwrap();
        // direct 4×4 product D·R
        let d = Ptm::depolarizing(0.9).unwrap();
        let direct = matmul(d.entries(), clean.entries());
        assert_mat_eq(noisy.entries(), &direct, 1e-15);
        for i in 1..4 {
            for j in 1..4 {
                assert_abs_diff_eq!(
                    noisy.entries()[i][j],
                    0.9 * clean.entries()[i][j],
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn compose_examples() {
        let gx = gate_ptm(&GateParams::ideal(), Gate::Gx).unwrap();
        assert_eq!(compose(&Ptm::identity(), &gx), gx);
        let gx2 = compose(&gx, &gx);
        // hand-multiplied
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ];
        assert_mat_eq(gx2.entries(), &expected, 1e-15);
        let gy = gate_ptm(&GateParams::ideal(), Gate::Gy).unwrap();
        assert_eq!(compose(&gx, &gy).entries()[0], [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn compose_order_is_operation_order() {
        let gx = gate_ptm(&GateParams::ideal(), Gate::Gx).unwrap();
        let gy = gate_ptm(&GateParams::ideal(), Gate::Gy).unwrap();
        let xy = compose(&gx, &gy);
        let v = StateVec::zero();
        let direct = gy.apply(&gx.apply(v.coords()));
        let composed = xy.apply(v.coords());
        for i in 0..4 {
            assert_abs_diff_eq!(composed[i], direct[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn power_matches_iteration() {
        let p = GateParams {
            x_angle: 1.3,
            depol_x: 0.97,
            ..GateParams::ideal()
        };
        let g = gate_ptm(&p, Gate::Gx).unwrap();
        let mut it = Ptm::identity();
        for k in 0..40 {
            assert_mat_eq(g.power(k).entries(), it.entries(), 1e-12);
            it = it.then(&g);
        }
    }

    #[test]
    fn outcome_probability_examples() {
        let gx = gate_ptm(&GateParams::ideal(), Gate::Gx).unwrap();
        let z = StateVec::zero();
        let e1 = EffectVec::proj_one();
        assert_abs_diff_eq!(
            outcome_probability(&e1, &[gx], &z).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            outcome_probability(&e1, &[gx, gx], &z).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(outcome_probability(&e1, &[], &z).unwrap(), 0.0);
    }

    #[test]
    fn repeated_rotation_closed_form() {
        let e1 = EffectVec::proj_one();
        let z = StateVec::zero();
        for i in 0..25 {
            let theta = -PI + 2.0 * PI * (i as f64 + 0.5) / 25.0;
            let p = GateParams {
                x_angle: theta,
                ..GateParams::ideal()
            };
            let g = gate_ptm(&p, Gate::Gx).unwrap();
            let mut circuit = Vec::new();
            for k in 1..=64 {
                circuit.push(g);
                let expected = (1.0 - (k as f64 * theta).cos()) / 2.0;
                let got = outcome_probability(&e1, &circuit, &z).unwrap();
                assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn out_of_range_probability_is_error() {
        // non-physical effect built from raw coordinates
        let bogus = EffectVec {
            coords: [2.0, 0.0, 0.0, 0.0],
        };
        let err = outcome_probability(&bogus, &[], &StateVec::zero()).unwrap_err();
        assert!(matches!(err, Error::InvalidProbability { .. }));
    }

    #[test]
    fn effect_complement_sums_to_one() {
        let g = gate_ptm(
            &GateParams {
                x_angle: 0.7,
                depol_x: 0.8,
                ..GateParams::ideal()
            },
            Gate::Gx,
        )
        .unwrap();
        let prep = StateVec::from_bloch([0.1, -0.2, 0.9]).unwrap();
        let e = EffectVec::from_pauli(0.48, [0.01, 0.0, -0.45]).unwrap();
        let p1 = outcome_probability(&e, &[g, g, g], &prep).unwrap();
        let p0 = outcome_probability(&e.complement(), &[g, g, g], &prep).unwrap();
        assert_abs_diff_eq!(p0 + p1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_effects_are_valid() {
        for e in [
            EffectVec::proj_zero(),
            EffectVec::proj_one(),
            EffectVec::m_x(),
            EffectVec::m_y(),
        ] {
            for s in [StateVec::zero(), StateVec::one(), StateVec::plus()] {
                let p = e.dot(s.coords());
                assert!((-1e-15..=1.0 + 1e-15).contains(&p));
            }
        }
        assert_eq!(
            EffectVec::from_pauli(0.5, [0.0, 0.0, -0.5]).unwrap(),
            EffectVec::proj_one()
        );
        assert!(EffectVec::from_pauli(0.5, [0.0, 0.0, 0.6]).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let z = StateVec::zero();
        assert_eq!(trace_distance(&z, &z), 0.0);
        assert_abs_diff_eq!(trace_distance(&z, &StateVec::one()), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            trace_distance(&z, &StateVec::plus()),
            FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn trace_distance_matches_density_matrix_eigenvalues() {
        // ρ_a − ρ_b = Δr·σ/2 has eigenvalues ±|Δr|/2; half the trace norm is |Δr|/2
        let a = StateVec::from_bloch([0.3, -0.4, 0.5]).unwrap();
        let b = StateVec::from_bloch([-0.1, 0.2, 0.6]).unwrap();
        let (ra, rb) = (a.bloch(), b.bloch());
        let dr: f64 = (0..3).map(|i| (ra[i] - rb[i]).powi(2)).sum::<f64>().sqrt();
        let eig = dr / 2.0;
        assert_abs_diff_eq!(trace_distance(&a, &b), 0.5 * (eig + eig), epsilon = 1e-15);
    }

    #[test]
    fn state_constructors_validate() {
        assert!(StateVec::from_bloch([0.8, 0.8, 0.0]).is_err());
        assert!(StateVec::from_coords([0.5, 0.0, 0.0, 0.0]).is_err());
        assert_eq!(
            StateVec::from_coords(*StateVec::plus().coords()).unwrap(),
            StateVec::plus()
        );
    }

    #[test]
    fn ptm_from_entries_requires_tp_row() {
        let mut m = *Ptm::identity().entries();
        m[0][1] = 1e-3;
        assert!(Ptm::from_entries(m).is_err());
        m[0][1] = 0.0;
        m[2][2] = f64::NAN;
        assert!(Ptm::from_entries(m).is_err());
    }

    #[test]
    fn gate_params_validation() {
        let bad = GateParams {
            depol_y: 1.2,
            ..GateParams::ideal()
        };
        assert!(gate_ptm(&bad, Gate::Gy).is_err());
        let bad = GateParams {
            x_angle: f64::INFINITY,
            ..GateParams::ideal()
        };
        assert!(bad.validate().is_err());
    }
}
