//! Plant catalog: the Laub-Loomis cAMP oscillation benchmark and small
//! closed-form systems used as test oracles.
//!
//! # Laub-Loomis
//!
//! Seven protein concentrations of the Dictyostelium aggregation network
//! (revisited form of the model), with rate constants `k1..k14`:
//!
//! | var | species        | equation                  |
//! |-----|----------------|---------------------------|
//! | x1  | ACA            | `k1 x7 - k2 x1 x2`        |
//! | x2  | PKA            | `k3 x5 - k4 x2`           |
//! | x3  | ERK2           | `k5 x7 - k6 x2 x3`        |
//! | x4  | REGA           | `k7 - k8 x3 x4`           |
//! | x5  | internal cAMP  | `k9 x1 - k10 x4 x5`       |
//! | x6  | external cAMP  | `k11 x1 - k12 x6`         |
//! | x7  | CAR1           | `k13 x6 - k14 x7`         |
//!
//! Units are min^-1 for linear rates (`k1..k5`, `k7`, `k9`, `k11..k13`) and
//! min^-1 uM^-1 for the bilinear ones (`k6`, `k10`, `k14`; also `k8`). With
//! the nominal values below the system settles onto a limit cycle of period
//! ~7.38 min.
//!
//! The default initial state is calibrated, not arbitrary: integrate from the
//! all-ones state for one transient bound `T_i = 7.3781` (RK4, `h = 0.05`)
//! and take the endpoint. The frozen coordinates live in
//! [`LAUB_LOOMIS_INITIAL`] and a test re-derives them from the recipe.

use std::sync::Arc;

use thiserror::Error;

use crate::hybrid::automaton::VectorField;

/// Laub-Loomis rate constants, `k[0] = k1` .. `k[13] = k14`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaubLoomisParams {
    pub k: [f64; 14],
}

/// Nominal ("oscillating") parameter values.
pub fn nominal_parameters() -> LaubLoomisParams {
    LaubLoomisParams {
        k: [2.0, 0.9, 2.5, 1.5, 0.6, 0.8, 1.0, 1.3, 0.3, 0.8, 0.7, 4.9, 23.0, 4.5],
    }
}

/// The seven right-hand sides, exactly as structured above.
pub fn laub_loomis_dynamics(x: &[f64], k: &[f64], out: &mut [f64]) {
    debug_assert_eq!(x.len(), 7);
    debug_assert_eq!(k.len(), 14);
    out[0] = k[0] * x[6] - k[1] * x[0] * x[1];
    out[1] = k[2] * x[4] - k[3] * x[1];
    out[2] = k[4] * x[6] - k[5] * x[1] * x[2];
    out[3] = k[6] - k[7] * x[2] * x[3];
    out[4] = k[8] * x[0] - k[9] * x[3] * x[4];
    out[5] = k[10] * x[0] - k[11] * x[5];
    out[6] = k[12] * x[5] - k[13] * x[6];
}

/// Calibrated default initial state: endpoint of one `T_i = 7.3781` from the
/// all-ones state (RK4, h = 0.05, nominal parameters). See module docs.
pub const LAUB_LOOMIS_INITIAL: [f64; 7] = [
    2.7091884801420645,
    1.4000224082430919,
    0.904034268963636,
    0.9481943269999872,
    0.888688942668395,
    0.3769155471323163,
    1.868319882998689,
];

/// A fixed-parameter plant `x' = f(x, k)`.
#[derive(Clone)]
pub struct Plant {
    pub name: String,
    /// State dimension n.
    pub dim: usize,
    /// Length of the full parameter vector.
    pub n_params: usize,
    /// `f(x, k_full, out)`.
    pub f: Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>,
    pub nominal: Vec<f64>,
    pub param_names: Vec<String>,
    pub default_initial: Vec<f64>,
    /// Recommended per-coordinate bounding box for goal sampling.
    pub bounding_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for Plant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plant")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("n_params", &self.n_params)
            .finish()
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown plant '{0}'")]
    UnknownPlant(String),
    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
    #[error("parameter index {0} out of range")]
    ParameterIndex(usize),
    #[error("parameter index {0} varied twice")]
    OverlappingIndices(usize),
    #[error("{0} boxes given for {1} varied parameters")]
    BoxCount(usize, usize),
}

/// A plant whose varied parameters joined the continuous state:
/// state `(x, k_varied)`, input `u = k_varied'`.
#[derive(Clone)]
pub struct AugmentedPlant {
    pub plant: Plant,
    /// Indices into the full parameter vector, in state order.
    pub varied: Vec<usize>,
    pub param_boxes: Vec<(f64, f64)>,
    pub input_boxes: Vec<(f64, f64)>,
    /// `f((x, k_varied), u, out)` over dim + varied.len() coordinates.
    pub dynamics: VectorField,
}

impl AugmentedPlant {
    pub fn dim(&self) -> usize {
        self.plant.dim
    }

    pub fn param_dim(&self) -> usize {
        self.varied.len()
    }

    /// Initial continuous state `(x0, k_varied at nominal)`.
    pub fn initial(&self) -> Vec<f64> {
        let mut v = self.plant.default_initial.clone();
        for &i in &self.varied {
            v.push(self.plant.nominal[i]);
        }
        v
    }
}

/// Extend a plant's state with the varied parameters as coordinates with
/// `k_i' = u_i`; non-varied parameters stay frozen at nominal.
pub fn augment_with_parameters(
    plant: &Plant,
    varied: &[usize],
    param_boxes: &[(f64, f64)],
    input_boxes: &[(f64, f64)],
) -> Result<AugmentedPlant, ModelError> {
    for (pos, &i) in varied.iter().enumerate() {
        if i >= plant.n_params {
            return Err(ModelError::ParameterIndex(i));
        }
        if varied[..pos].contains(&i) {
            return Err(ModelError::OverlappingIndices(i));
        }
    }
    if param_boxes.len() != varied.len() {
        return Err(ModelError::BoxCount(param_boxes.len(), varied.len()));
    }
    if input_boxes.len() != varied.len() {
        return Err(ModelError::BoxCount(input_boxes.len(), varied.len()));
    }
    let n = plant.dim;
    let varied_vec = varied.to_vec();
    let nominal = plant.nominal.clone();
    let f = plant.f.clone();
    let dynamics: VectorField = Arc::new(move |y, u, out| {
        let mut k = nominal.clone();
        for (pos, &i) in varied_vec.iter().enumerate() {
            k[i] = y[n + pos];
        }
        f(&y[..n], &k, &mut out[..n]);
        out[n..n + varied_vec.len()].copy_from_slice(u);
    });
    Ok(AugmentedPlant {
        plant: plant.clone(),
        varied: varied.to_vec(),
        param_boxes: param_boxes.to_vec(),
        input_boxes: input_boxes.to_vec(),
        dynamics,
    })
}

pub fn laub_loomis() -> Plant {
    Plant {
        name: "laub_loomis".into(),
        dim: 7,
        n_params: 14,
        f: Arc::new(|x, k, out| laub_loomis_dynamics(x, k, out)),
        nominal: nominal_parameters().k.to_vec(),
        param_names: (1..=14).map(|i| format!("k{i}")).collect(),
        default_initial: LAUB_LOOMIS_INITIAL.to_vec(),
        bounding_box: vec![
            (1.2, 3.8),
            (0.8, 2.5),
            (0.4, 1.4),
            (0.5, 1.6),
            (0.4, 1.8),
            (0.15, 0.65),
            (0.9, 2.9),
        ],
    }
}

/// Harmonic oscillator `x1' = x2, x2' = -x1` from (1, 0); period 2*pi.
pub fn harmonic() -> Plant {
    Plant {
        name: "harmonic".into(),
        dim: 2,
        n_params: 0,
        f: Arc::new(|x, _k, out| {
            out[0] = x[1];
            out[1] = -x[0];
        }),
        nominal: vec![],
        param_names: vec![],
        default_initial: vec![1.0, 0.0],
        bounding_box: vec![(-1.5, 1.5), (-1.5, 1.5)],
    }
}

/// Contracting linear system `x' = -x` from 1; converges to the origin.
pub fn contract() -> Plant {
    Plant {
        name: "contract".into(),
        dim: 1,
        n_params: 0,
        f: Arc::new(|x, _k, out| out[0] = -x[0]),
        nominal: vec![],
        param_names: vec![],
        default_initial: vec![1.0],
        bounding_box: vec![(-1.5, 1.5)],
    }
}

/// Supercritical Hopf normal form with parameters (mu, omega):
/// `x' = mu x - omega y - x (x^2 + y^2)`, `y' = omega x + mu y - y (x^2 + y^2)`.
/// For mu > 0 a stable limit cycle of radius sqrt(mu) and angular speed
/// omega; driving mu across zero collapses the cycle into a focus.
pub fn hopf() -> Plant {
    Plant {
        name: "hopf".into(),
        dim: 2,
        n_params: 2,
        f: Arc::new(|x, k, out| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            out[0] = k[0] * x[0] - k[1] * x[1] - x[0] * r2;
            out[1] = k[1] * x[0] + k[0] * x[1] - x[1] * r2;
        }),
        nominal: vec![1.0, 1.0],
        param_names: vec!["mu".into(), "omega".into()],
        default_initial: vec![1.0, 0.0],
        bounding_box: vec![(-1.6, 1.6), (-1.6, 1.6)],
    }
}

/// The plant catalog, addressable by name from config files.
pub fn plant_by_name(name: &str) -> Result<Plant, ModelError> {
    match name {
        "laub_loomis" => Ok(laub_loomis()),
        "harmonic" => Ok(harmonic()),
        "contract" => Ok(contract()),
        "hopf" => Ok(hopf()),
        other => Err(ModelError::UnknownPlant(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::integrate::rk4_step;

    #[test]
    fn dynamics_at_zero_state() {
        let k = nominal_parameters().k;
        let mut out = [0.0; 7];
        laub_loomis_dynamics(&[0.0; 7], &k, &mut out);
        assert_eq!(out, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn dynamics_at_all_ones() {
        let k = nominal_parameters().k;
        let mut out = [0.0; 7];
        laub_loomis_dynamics(&[1.0; 7], &k, &mut out);
        let want = [1.1, 1.0, -0.2, -0.3, -0.5, -4.2, 18.5];
        for (got, want) in out.iter().zip(&want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_rates_zero_field() {
        let mut out = [1.0; 7];
        laub_loomis_dynamics(&[3.0; 7], &[0.0; 14], &mut out);
        assert_eq!(out, [0.0; 7]);
    }

    #[test]
    fn nominal_values_as_published() {
        let k = nominal_parameters().k;
        assert_eq!(k[0], 2.0);
        assert_eq!(k[6], 1.0);
        assert_eq!(k[12], 23.0);
        assert_eq!(k[13], 4.5);
    }

    /// Independent re-derivation: each row is a sum of at most two signed
    /// monomials; build the field from a term table and compare on random
    /// points.
    #[test]
    fn term_table_agrees_with_direct_form() {
        // (k index, variable indices) per output, two terms each except x4
        // whose first term is the constant k7.
        type Term = (usize, &'static [usize]);
        const TABLE: [[Term; 2]; 7] = [
            [(0, &[6]), (1, &[0, 1])],
            [(2, &[4]), (3, &[1])],
            [(4, &[6]), (5, &[1, 2])],
            [(6, &[]), (7, &[2, 3])],
            [(8, &[0]), (9, &[3, 4])],
            [(10, &[0]), (11, &[5])],
            [(12, &[5]), (13, &[6])],
        ];
        let table_eval = |x: &[f64], k: &[f64], out: &mut [f64]| {
            for (row, terms) in TABLE.iter().enumerate() {
                let term = |t: &Term| -> f64 {
                    let mut v = k[t.0];
                    for &vi in t.1 {
                        v *= x[vi];
                    }
                    v
                };
                out[row] = term(&terms[0]) - term(&terms[1]);
            }
        };
        let k = nominal_parameters().k;
        // deterministic pseudo-random points
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 4.0
        };
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..7).map(|_| next()).collect();
            let mut a = [0.0; 7];
            let mut b = [0.0; 7];
            laub_loomis_dynamics(&x, &k, &mut a);
            table_eval(&x, &k, &mut b);
            for i in 0..7 {
                assert!((a[i] - b[i]).abs() <= 1e-12, "row {i}: {} vs {}", a[i], b[i]);
            }
        }
    }

    #[test]
    fn calibrated_initial_state_matches_recipe() {
        // integrate all-ones for one T_i = 7.3781 at h = 0.05 (148 steps,
        // crossing rule: first sample with t >= T_i)
        let plant = laub_loomis();
        let field: VectorField = Arc::new(move |x, _u, out| {
            laub_loomis_dynamics(x, &nominal_parameters().k, out)
        });
        let mut x = vec![1.0; 7];
        let steps = (7.3781f64 / 0.05).ceil() as usize;
        assert_eq!(steps, 148);
        for _ in 0..steps {
            x = rk4_step(&field, &x, &[], 0.05).unwrap();
        }
        for (got, want) in x.iter().zip(plant.default_initial.iter()) {
            assert_eq!(got.to_bits(), want.to_bits(), "{got} vs {want}");
        }
    }

    #[test]
    fn trajectory_stays_bounded_for_200_time_units() {
        let field: VectorField = Arc::new(move |x, _u, out| {
            laub_loomis_dynamics(x, &nominal_parameters().k, out)
        });
        let mut x = LAUB_LOOMIS_INITIAL.to_vec();
        for _ in 0..4000 {
            x = rk4_step(&field, &x, &[], 0.05).unwrap();
            assert!(x.iter().all(|v| v.abs() < 1e4));
        }
    }

    #[test]
    fn augmentation_shapes_and_freezing() {
        let plant = laub_loomis();
        let aug =
            augment_with_parameters(&plant, &[0], &[(1.8, 2.2)], &[(-0.1, 0.1)]).unwrap();
        assert_eq!(aug.dim() + aug.param_dim(), 8);
        let init = aug.initial();
        assert_eq!(init.len(), 8);
        assert_eq!(init[7], 2.0);

        // frozen parameters: integrating with u = 0 leaves k1 bit-constant
        let mut y = init.clone();
        let k1_bits = y[7].to_bits();
        for _ in 0..100 {
            y = rk4_step(&aug.dynamics, &y, &[0.0], 0.05).unwrap();
            assert_eq!(y[7].to_bits(), k1_bits);
        }
    }

    #[test]
    fn augmentation_rejects_bad_indices() {
        let plant = laub_loomis();
        assert!(matches!(
            augment_with_parameters(&plant, &[0, 0], &[(0.0, 1.0); 2], &[(0.0, 1.0); 2]),
            Err(ModelError::OverlappingIndices(0))
        ));
        assert!(matches!(
            augment_with_parameters(&plant, &[99], &[(0.0, 1.0)], &[(0.0, 1.0)]),
            Err(ModelError::ParameterIndex(99))
        ));
    }

    #[test]
    fn empty_augmentation_is_the_plain_plant() {
        let plant = harmonic();
        let aug = augment_with_parameters(&plant, &[], &[], &[]).unwrap();
        assert_eq!(aug.param_dim(), 0);
        let y = rk4_step(&aug.dynamics, &[1.0, 0.0], &[], 0.05).unwrap();
        let direct = rk4_step(
            &(Arc::new(|x: &[f64], _u: &[f64], out: &mut [f64]| {
                out[0] = x[1];
                out[1] = -x[0];
            }) as VectorField),
            &[1.0, 0.0],
            &[],
            0.05,
        )
        .unwrap();
        assert_eq!(y, direct);
    }

    #[test]
    fn catalog_names() {
        for name in ["laub_loomis", "harmonic", "contract", "hopf"] {
            assert!(plant_by_name(name).is_ok());
        }
        assert!(plant_by_name("nope").is_err());
    }
}
