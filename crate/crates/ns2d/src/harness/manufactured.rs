//! Trigonometric exact solutions with closed-form forcing, used for
//! convergence studies.

use std::f64::consts::PI;

use crate::splitstep::{BcMode, ProblemData};

/// Which damping/boundary-condition combination a study exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    /// No damping, Neumann pressure condition.
    I,
    /// Damping alpha = 1/h^2, Neumann pressure condition.
    II,
    /// No damping, weighted-average pressure rows.
    III,
    /// Damping alpha = 1/h^2, weighted-average pressure rows.
    IV,
}

impl CaseId {
    pub fn parse(s: &str) -> Option<CaseId> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Some(CaseId::I),
            "ii" | "2" => Some(CaseId::II),
            "iii" | "3" => Some(CaseId::III),
            "iv" | "4" => Some(CaseId::IV),
            _ => None,
        }
    }
}

/// Divergence-free trigonometric exact fields
///   u = a sin(fx pi x) sin(fy pi y) cos(ft pi t)
///   v = a cos(fx pi x) cos(fy pi y) cos(ft pi t)
///   p = a sin(fx pi x) cos(fy pi y) cos(ft pi t)
/// (solenoidal because fx = fy).
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub a: f64,
    pub fx: f64,
    pub fy: f64,
    pub ft: f64,
}

impl ManufacturedCase {
    pub fn new(id: CaseId) -> Self {
        ManufacturedCase {
            id,
            a: 0.5,
            fx: 2.0,
            fy: 2.0,
            ft: 2.0,
        }
    }

    /// Damping constant in alpha = cd / h_min^2.
    pub fn cd(&self) -> f64 {
        match self.id {
            CaseId::I | CaseId::III => 0.0,
            CaseId::II | CaseId::IV => 1.0,
        }
    }

    pub fn bc_mode(&self) -> BcMode {
        match self.id {
            CaseId::I | CaseId::II => BcMode::Tn,
            CaseId::III | CaseId::IV => BcMode::Wabe,
        }
    }

    fn trig(&self, x: f64, y: f64, t: f64) -> (f64, f64, f64, f64, f64) {
        (
            (self.fx * PI * x).sin(),
            (self.fx * PI * x).cos(),
            (self.fy * PI * y).sin(),
            (self.fy * PI * y).cos(),
            (self.ft * PI * t).cos(),
        )
    }

    pub fn exact_velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let (sx, cx, sy, cy, tc) = self.trig(x, y, t);
        [self.a * sx * sy * tc, self.a * cx * cy * tc]
    }

    pub fn exact_pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        let (sx, _, _, cy, tc) = self.trig(x, y, t);
        self.a * sx * cy * tc
    }

    pub fn exact_velocity_dt(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let (sx, cx, sy, cy, _) = self.trig(x, y, t);
        let td = -self.ft * PI * (self.ft * PI * t).sin();
        [self.a * sx * sy * td, self.a * cx * cy * td]
    }

    /// F = rho (u_t + (u . grad) u) + grad p - mu Lap u in closed form.
    pub fn forcing(&self, rho: f64, mu: f64, x: f64, y: f64, t: f64) -> [f64; 2] {
        let (sx, cx, sy, cy, tc) = self.trig(x, y, t);
        let a = self.a;
        let (fx, fy) = (self.fx, self.fy);
        let td = -self.ft * PI * (self.ft * PI * t).sin();
        let lap = (fx * fx + fy * fy) * PI * PI;

        let ut = a * sx * sy * td;
        let vt = a * cx * cy * td;
        let conv_x = a * a * PI * sx * cx * (fx * sy * sy + fy * cy * cy) * tc * tc;
        let conv_y = -a * a * PI * sy * cy * (fx * sx * sx + fy * cx * cx) * tc * tc;
        let px = a * fx * PI * cx * cy * tc;
        let py = -a * fy * PI * sx * sy * tc;
        let lap_u = -a * lap * sx * sy * tc;
        let lap_v = -a * lap * cx * cy * tc;
        [
            rho * (ut + conv_x) + px - mu * lap_u,
            rho * (vt + conv_y) + py - mu * lap_v,
        ]
    }

    /// div F = rho grad u : (grad u)^T + Lap p in closed form.
    pub fn div_forcing(&self, rho: f64, x: f64, y: f64, t: f64) -> f64 {
        let (sx, cx, sy, cy, tc) = self.trig(x, y, t);
        let a = self.a;
        let (fx, fy) = (self.fx, self.fy);
        let p2 = PI * PI;
        let gg = a * a * p2 * tc * tc
            * ((fx * fx + fy * fy) * cx * cx * sy * sy - 2.0 * fx * fy * sx * sx * cy * cy);
        let lap_p = -a * (fx * fx + fy * fy) * p2 * sx * cy * tc;
        rho * gg + lap_p
    }
}

/// Manufactured case packaged as integrator problem data.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedProblem {
    pub case: ManufacturedCase,
    pub rho: f64,
    pub mu: f64,
}

impl ProblemData for ManufacturedProblem {
    fn initial_velocity(&self, x: f64, y: f64) -> [f64; 2] {
        self.case.exact_velocity(x, y, 0.0)
    }

    fn boundary_velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.case.exact_velocity(x, y, t)
    }

    fn boundary_velocity_dt(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.case.exact_velocity_dt(x, y, t)
    }

    fn forcing(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.case.forcing(self.rho, self.mu, x, y, t)
    }

    fn div_forcing(&self, x: f64, y: f64, t: f64) -> f64 {
        self.case.div_forcing(self.rho, x, y, t)
    }
}
