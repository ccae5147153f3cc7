//! Plants shipped with the crate.
//!
//! * `linear-demo`: a stable three-state linear system, useful as a sanity
//!   check because its linearization is exact.
//! * `cstr`: exothermic first-order reaction in a cooled stirred tank,
//!   linearized around its open-loop unstable middle steady state.
//! * `rsr`: reactor, separator and recycle loop with eight states. The
//!   separator holdup is a pure integrator and the reactor runs at an
//!   unstable hot operating point.
//!
//! Time is in hours, temperatures in kelvin, concentrations in kmol/m³.

use super::{FnDynamics, LtiDynamics, Monitored, PlantDescriptor};
use crate::numerics::RealMatrix;
use crate::statespace::ChannelLabels;

pub const PLANT_NAMES: [&str; 3] = ["linear-demo", "cstr", "rsr"];

fn labels(states: &[&str], inputs: &[&str], outputs: &[&str]) -> ChannelLabels {
    let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
    ChannelLabels {
        states: own(states),
        inputs: own(inputs),
        outputs: own(outputs),
    }
}

pub fn linear_demo() -> PlantDescriptor {
    let m = |rows: &[&[f64]]| RealMatrix::from_rows(rows).expect("static matrix");
    let dynamics = LtiDynamics {
        a: m(&[&[-1.0, 0.5, 0.0], &[0.2, -2.0, 1.0], &[0.0, 0.4, -2.5]]),
        b: m(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]),
        c: m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]]),
        d: m(&[&[0.0, 0.0], &[0.1, 0.0]]),
    };
    PlantDescriptor::builder("linear-demo", dynamics, vec![2.0, 1.0, 1.0], vec![1.5, 0.6])
        .labels(labels(&["x1", "x2", "x3"], &["u1", "u2"], &["y1", "y2"]))
        .build()
        .expect("bundled plant is valid")
}

/// Cooled exothermic tank reactor, `A → B`.
#[derive(Clone, Debug, PartialEq)]
pub struct CstrParams {
    /// Arrhenius prefactor, 1/h.
    pub k0: f64,
    /// Activation energy over gas constant, K.
    pub e_over_r: f64,
    /// Reaction enthalpy over volumetric heat capacity, K·m³/kmol.
    pub heat_gain: f64,
    /// Jacket heat-transfer coefficient over volumetric heat capacity, 1/h.
    pub cooling: f64,
    /// Feed concentration, kmol/m³.
    pub ca_feed: f64,
    /// Feed temperature, K.
    pub t_feed: f64,
}

impl Default for CstrParams {
    fn default() -> Self {
        Self {
            k0: 9703.0 * 3600.0,
            e_over_r: 11843.0 / 1.987,
            heat_gain: 5960.0 / 500.0,
            cooling: 150.0 / 500.0,
            ca_feed: 10.0,
            t_feed: 298.0,
        }
    }
}

impl CstrParams {
    /// States `[C_A, T]`, inputs `[T_j, q]` with `q` the dilution rate.
    pub fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let (ca, t) = (x[0], x[1]);
        let (tj, q) = (u[0], u[1]);
        let rate = self.k0 * (-self.e_over_r / t).exp() * ca;
        dx[0] = q * (self.ca_feed - ca) - rate;
        dx[1] = q * (self.t_feed - t) + self.heat_gain * rate - self.cooling * (t - tj);
    }
}

/// Middle steady state of the default tank at `T_j = 298 K`, `q = 1 /h`.
pub const CSTR_NOMINAL_X: [f64; 2] = [5.517931134913724, 339.0971237475603];
pub const CSTR_NOMINAL_U: [f64; 2] = [298.0, 1.0];

pub fn cstr() -> PlantDescriptor {
    let p = CstrParams::default();
    let dynamics = FnDynamics::state_output(2, 2, move |x, u, dx| p.derivative(x, u, dx));
    PlantDescriptor::builder(
        "cstr",
        dynamics,
        CSTR_NOMINAL_X.to_vec(),
        CSTR_NOMINAL_U.to_vec(),
    )
    .labels(labels(&["C_A", "T"], &["T_j", "q"], &["C_A", "T"]))
    .noise_std(vec![0.01, 0.1])
    .sample_periods(vec![0.1, 0.0])
    .constraint(Monitored::State(1), 280.0, 400.0)
    .constraint(Monitored::State(0), 0.0, 10.0)
    .build()
    .expect("bundled plant is valid")
}

/// Reactor, flash separator and recycle.
#[derive(Clone, Debug, PartialEq)]
pub struct RsrParams {
    /// Reactor volume, m³.
    pub v_reactor: f64,
    pub ca_feed: f64,
    pub t_feed: f64,
    pub k0: f64,
    pub e_over_r: f64,
    /// Adiabatic temperature rise per unit conversion, K·m³/kmol.
    pub heat_gain: f64,
    /// Reactor jacket coefficient, 1/h.
    pub ua_reactor: f64,
    /// Pressure lag, h.
    pub tau_p: f64,
    /// Lumped gas constant for the headspace pressure, bar·m³/(kmol·K).
    pub kappa: f64,
    /// Separator cross-section, m².
    pub area: f64,
    /// Separator cooling coefficient, m³/h.
    pub ua_sep: f64,
    pub t_cooling_water: f64,
}

impl Default for RsrParams {
    fn default() -> Self {
        Self {
            v_reactor: 10.0,
            ca_feed: 8.0,
            t_feed: 300.0,
            k0: 2e8,
            e_over_r: 7000.0,
            heat_gain: 60.0,
            ua_reactor: 2.5,
            tau_p: 0.02,
            kappa: 0.004,
            area: 2.0,
            ua_sep: 4.0,
            t_cooling_water: 290.0,
        }
    }
}

impl RsrParams {
    /// States `[CA_r, CB_r, T_r, P_r, L, CA_s, CB_s, T_s]`, inputs
    /// `[F_feed, T_c, F_liq, F_rec]`.
    pub fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let [ca_r, cb_r, t_r, p_r, level, ca_s, cb_s, t_s] =
            [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]];
        let [f_feed, t_c, f_liq, f_rec] = [u[0], u[1], u[2], u[3]];
        let rate = self.k0 * (-self.e_over_r / t_r).exp() * ca_r;
        let f_out = f_feed + f_rec;
        let v_sep = self.area * level;
        let vr = self.v_reactor;
        dx[0] = (f_feed * self.ca_feed + f_rec * ca_s - f_out * ca_r) / vr - rate;
        dx[1] = (f_rec * cb_s - f_out * cb_r) / vr + rate;
        dx[2] = (f_feed * self.t_feed + f_rec * t_s - f_out * t_r) / vr + self.heat_gain * rate
            - self.ua_reactor * (t_r - t_c);
        dx[3] = (self.kappa * (ca_r + cb_r) * t_r - p_r) / self.tau_p;
        dx[4] = (f_feed - f_liq) / self.area;
        dx[5] = f_out * (ca_r - ca_s) / v_sep;
        dx[6] = f_out * (cb_r - cb_s) / v_sep;
        dx[7] = (f_out * (t_r - t_s) - self.ua_sep * (t_s - self.t_cooling_water)) / v_sep;
    }
}

pub const RSR_NOMINAL_X: [f64; 8] = [
    6.180716603537299,
    1.8192833964626995,
    356.34884866305214,
    11.403163157217666,
    1.5,
    6.180716603537299,
    1.8192833964626995,
    351.4341191324557,
];
pub const RSR_NOMINAL_U: [f64; 4] = [20.0, 320.0, 20.0, 30.0];

pub fn rsr() -> PlantDescriptor {
    let p = RsrParams::default();
    let dynamics = FnDynamics::new(
        8,
        4,
        6,
        move |x, u, dx| p.derivative(x, u, dx),
        |x, _u, y| {
            y[0] = x[2];
            y[1] = x[3];
            y[2] = x[4];
            y[3] = x[7];
            y[4] = x[5];
            y[5] = x[6];
        },
    );
    PlantDescriptor::builder(
        "rsr",
        dynamics,
        RSR_NOMINAL_X.to_vec(),
        RSR_NOMINAL_U.to_vec(),
    )
    .labels(labels(
        &["CA_r", "CB_r", "T_r", "P_r", "L", "CA_s", "CB_s", "T_s"],
        &["F_feed", "T_c", "F_liq", "F_rec"],
        &["T_r", "P_r", "L", "T_s", "CA_s", "CB_s"],
    ))
    .noise_std(vec![0.1, 0.02, 0.005, 0.1, 0.01, 0.01])
    .sample_periods(vec![0.0, 0.0, 0.0, 0.0, 0.1, 0.25])
    .constraint(Monitored::State(2), 300.0, 390.0)
    .constraint(Monitored::State(3), 0.0, 13.5)
    .constraint(Monitored::State(4), 0.2, 3.0)
    .build()
    .expect("bundled plant is valid")
}

pub fn bundled_plants() -> Vec<PlantDescriptor> {
    vec![linear_demo(), cstr(), rsr()]
}

pub fn plant_by_name(name: &str) -> Option<PlantDescriptor> {
    match name {
        "linear-demo" => Some(linear_demo()),
        "cstr" => Some(cstr()),
        "rsr" => Some(rsr()),
        _ => None,
    }
}
