//! Battery state of charge and chip temperature models.
//!
//! Both models are pure value-in/value-out step functions driven by the
//! simulation loop. The battery integrates net power with unit round-trip
//! efficiency and clamps at its physical bounds; policy (when to stop
//! processing) is the executor's job, not the battery's. The thermal model
//! is first order: linear heating from dissipated compute power plus
//! Newton cooling toward ambient.

use serde::{Deserialize, Serialize};

/// Instantaneous power ledger for one simulation step, all in watts.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PowerLedger {
    pub p_generated_w: f64,
    pub p_platform_w: f64,
    pub p_compute_w: f64,
    pub p_comm_w: f64,
}

impl PowerLedger {
    pub fn net_w(&self) -> f64 {
        self.p_generated_w - self.consumed_w()
    }

    pub fn consumed_w(&self) -> f64 {
        self.p_platform_w + self.p_compute_w + self.p_comm_w
    }
}

/// Battery with capacity and current charge in watt-hours.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BatteryState {
    pub capacity_wh: f64,
    pub charge_wh: f64,
}

impl BatteryState {
    pub fn new(capacity_wh: f64, initial_soc: f64) -> Self {
        BatteryState {
            capacity_wh,
            charge_wh: (capacity_wh * initial_soc).clamp(0.0, capacity_wh),
        }
    }

    /// State of charge as a fraction in `[0, 1]`.
    pub fn soc(&self) -> f64 {
        self.charge_wh / self.capacity_wh
    }
}

/// Integrates the net power over `dt` seconds, clamping at the battery
/// bounds (physical saturation, not an error).
pub fn battery_step(state: BatteryState, ledger: PowerLedger, dt_s: f64) -> BatteryState {
    debug_assert!(dt_s > 0.0);
    let charge_wh =
        (state.charge_wh + ledger.net_w() * dt_s / 3600.0).clamp(0.0, state.capacity_wh);
    BatteryState {
        capacity_wh: state.capacity_wh,
        charge_wh,
    }
}

/// Battery state of charge. See [`BatteryState::soc`].
pub fn soc(state: &BatteryState) -> f64 {
    state.soc()
}

/// Chip temperature with its first-order model coefficients.
///
/// `heat_coeff` is the temperature rise per joule dissipated above the base
/// draw; `cool_coeff` is the per-second relaxation rate toward ambient.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThermalState {
    pub temp_c: f64,
    pub ambient_c: f64,
    pub heat_coeff_c_per_j: f64,
    pub cool_coeff_per_s: f64,
}

/// Default thermal calibration.
///
/// Anchored so the chip idles at ambient (45 °C) and sustained execution of
/// the reference four-function set settles at 51.5 °C. The short time
/// constant (~2.5 s) matches a small bare compute board: individual
/// invocations move the temperature by visible fractions of a degree.
pub const DEFAULT_AMBIENT_C: f64 = 45.0;
pub const DEFAULT_HEAT_COEFF_C_PER_J: f64 = 1.42;
pub const DEFAULT_COOL_COEFF_PER_S: f64 = 0.408;

impl ThermalState {
    pub fn new(initial_temp_c: f64) -> Self {
        ThermalState {
            temp_c: initial_temp_c,
            ambient_c: DEFAULT_AMBIENT_C,
            heat_coeff_c_per_j: DEFAULT_HEAT_COEFF_C_PER_J,
            cool_coeff_per_s: DEFAULT_COOL_COEFF_PER_S,
        }
    }

    /// Steady-state temperature under sustained dissipation `p_w`.
    pub fn equilibrium_c(&self, p_w: f64) -> f64 {
        self.ambient_c + self.heat_coeff_c_per_j * p_w / self.cool_coeff_per_s
    }
}

/// Advances the chip temperature by `dt` seconds under `p_dissipated_w`
/// (compute power above the base draw).
pub fn thermal_step(state: ThermalState, p_dissipated_w: f64, dt_s: f64) -> ThermalState {
    debug_assert!(dt_s > 0.0);
    let dtemp = dt_s
        * (state.heat_coeff_c_per_j * p_dissipated_w
            - state.cool_coeff_per_s * (state.temp_c - state.ambient_c));
    ThermalState {
        temp_c: state.temp_c + dtemp,
        ..state
    }
}
