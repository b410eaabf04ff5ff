//! The mixed local-nonlocal operator
//! `L u = -div(a grad u) + (-Delta)^{s/2}(b (-Delta)^{s/2} u) + c u`,
//! its energy form `B`, and the quantities used by the energy estimates.

mod gagliardo;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    check_order, dot, forward_raw, inverse_real, product_unchecked, Dealias, Field, GridSpec,
    WaveVector,
};

pub use gagliardo::{gagliardo_seminorm_bruteforce, GagliardoEstimate, GAGLIARDO_COST_LIMIT};

/// Slack allowed below the declared floors when validating coefficients.
pub const FLOOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Floors {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
}

/// Coefficients `(a, b, c)`, their floors and the fractional order `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorData {
    a: Field,
    b: Field,
    c: Field,
    order: f64,
    floors: Floors,
    dealias: Dealias,
}

impl OperatorData {
    pub fn new(a: Field, b: Field, c: Field, order: f64, floors: Floors) -> Result<Self> {
        check_order(order)?;
        a.ensure_same_grid(&b)?;
        a.ensure_same_grid(&c)?;
        for (name, floor) in [("a0", floors.a0), ("b0", floors.b0), ("c0", floors.c0)] {
            if !(floor > 0.0 && floor.is_finite()) {
                return Err(Error::InvalidOperator(format!(
                    "{name} must be positive, got {floor} (c0 = 0 is not supported)"
                )));
            }
        }
        for (name, field, floor) in [("a", &a, floors.a0), ("b", &b, floors.b0), ("c", &c, floors.c0)] {
            let min = field.min();
            if min < floor - FLOOR_TOLERANCE {
                return Err(Error::InvalidOperator(format!(
                    "min({name}) = {min} is below its floor {floor}"
                )));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            order,
            floors,
            dealias: Dealias::None,
        })
    }

    /// Constant coefficients sitting exactly at their floors.
    pub fn constant(grid: GridSpec, order: f64, a0: f64, b0: f64, c0: f64) -> Result<Self> {
        grid.validate()?;
        Self::new(
            Field::constant(grid, a0),
            Field::constant(grid, b0),
            Field::constant(grid, c0),
            order,
            Floors { a0, b0, c0 },
        )
    }

    pub fn with_dealias(mut self, dealias: Dealias) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        self.a.grid()
    }

    pub fn a(&self) -> &Field {
        &self.a
    }

    pub fn b(&self) -> &Field {
        &self.b
    }

    pub fn c(&self) -> &Field {
        &self.c
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn floors(&self) -> Floors {
        self.floors
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    /// Symbol of the constant-coefficient operator at the floors,
    /// `a0 |k|^2 + b0 |k|^{2s} + c0`, as realised on the grid.
    pub fn floor_symbol(&self, w: &WaveVector) -> f64 {
        self.floors.a0 * w.local_symbol()
            + self.floors.b0 * w.abs_power(2.0 * self.order)
            + self.floors.c0
    }

    fn check(&self, u: &Field) -> Result<()> {
        self.a.ensure_same_grid(u)
    }

    fn product(&self, coeff: &Field, values: Vec<f64>) -> Vec<f64> {
        let f = Field::from_raw(*self.grid(), values);
        product_unchecked(coeff, &f, self.dealias).into_values()
    }
}

/// Spectral gradient and `(-Delta)^{s/2}` of one field, sharing a transform.
struct Derivatives {
    grad: Vec<Vec<f64>>,
    frac: Vec<f64>,
}

fn derivatives(grid: &GridSpec, u: &Field, s: f64) -> Derivatives {
    let coeffs = forward_raw(grid, u.values());
    let grad = (0..grid.dimension)
        .map(|axis| {
            let c = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * Complex64::new(0.0, grid.wave_vector(i).derivative_k(axis)))
                .collect();
            inverse_real(grid, c)
        })
        .collect();
    let frac = inverse_real(
        grid,
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * grid.wave_vector(i).abs_power(s))
            .collect(),
    );
    Derivatives { grad, frac }
}

/// `L u` with pointwise coefficient products.
pub fn apply_l(p: &OperatorData, u: &Field) -> Result<Field> {
    p.check(u)?;
    let grid = *p.grid();
    let s = p.order;
    let Derivatives { grad, frac } = derivatives(&grid, u, s);

    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, g) in grad.into_iter().enumerate() {
        let flux = forward_raw(&grid, &p.product(&p.a, g));
        for (i, (a, f)) in acc.iter_mut().zip(flux).enumerate() {
            // -div: symbol -i k
            *a += f * Complex64::new(0.0, -grid.wave_vector(i).derivative_k(axis));
        }
    }
    let weighted = forward_raw(&grid, &p.product(&p.b, frac));
    for (i, (a, f)) in acc.iter_mut().zip(weighted).enumerate() {
        *a += f * grid.wave_vector(i).abs_power(s);
    }
    let mut out = inverse_real(&grid, acc);
    let cu = p.product(&p.c, u.values().to_vec());
    out.iter_mut().zip(cu).for_each(|(o, m)| *o += m);
    Ok(Field::from_raw(grid, out))
}

/// Weighted inner products `<a grad u, grad v>`, `<b Lu, Lv>`, `<c u, v>`.
fn form_parts(p: &OperatorData, u: &Field, v: &Field) -> [f64; 3] {
    let grid = *p.grid();
    let h = grid.cell_volume();
    let du = derivatives(&grid, u, p.order);
    let same = std::ptr::eq(u, v);
    let dv_store;
    let dv = if same {
        &du
    } else {
        dv_store = derivatives(&grid, v, p.order);
        &dv_store
    };
    let grad: f64 = du
        .grad
        .iter()
        .zip(&dv.grad)
        .map(|(gu, gv)| dot(&p.product(&p.a, gu.clone()), gv))
        .sum();
    let frac = dot(&p.product(&p.b, du.frac.clone()), &dv.frac);
    let mass = dot(&p.product(&p.c, u.values().to_vec()), v.values());
    [grad * h, frac * h, mass * h]
}

/// `B(u, v) = int a grad u . grad v + int b Lu Lv + int c u v`, `L = (-Delta)^{s/2}`.
pub fn bilinear_form(p: &OperatorData, u: &Field, v: &Field) -> Result<f64> {
    p.check(u)?;
    p.check(v)?;
    Ok(form_parts(p, u, v).iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub l2_sq: f64,
    /// `||a^{1/2} grad u||^2`
    pub grad_w_sq: f64,
    /// `||b^{1/2} (-Delta)^{s/2} u||^2`
    pub frac_w_sq: f64,
    /// `||c^{1/2} u||^2`
    pub mass_w_sq: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// The `B(u, u)` part of the energy.
    pub fn form_part(&self) -> f64 {
        self.grad_w_sq + self.frac_w_sq + self.mass_w_sq
    }
}

pub fn energy(p: &OperatorData, u: &Field) -> Result<EnergyBreakdown> {
    p.check(u)?;
    let [grad_w_sq, frac_w_sq, mass_w_sq] = form_parts(p, u, u);
    let l2_sq = u.l2_norm_sq();
    Ok(EnergyBreakdown {
        l2_sq,
        grad_w_sq,
        frac_w_sq,
        mass_w_sq,
        total: l2_sq + grad_w_sq + frac_w_sq + mass_w_sq,
    })
}

/// `B(u,u) - (a0 ||grad u||^2 + b0 ||(-Delta)^{s/2} u||^2 + c0 ||u||^2)`.
pub fn coercivity_margin(p: &OperatorData, u: &Field) -> Result<f64> {
    p.check(u)?;
    let grid = *p.grid();
    let h = grid.cell_volume();
    let d = derivatives(&grid, u, p.order);
    let grad_sq: f64 = d.grad.iter().map(|g| dot(g, g)).sum::<f64>() * h;
    let frac_sq = dot(&d.frac, &d.frac) * h;
    let b = form_parts(p, u, u).iter().sum::<f64>();
    let f = p.floors;
    Ok(b - (f.a0 * grad_sq + f.b0 * frac_sq + f.c0 * u.l2_norm_sq()))
}

/// `2 (1 + 1/a0 + 1/b0)(1 + ||a||_inf + ||b||_inf + ||c||_inf)`, sup norms over the grid.
pub fn apriori_constant(p: &OperatorData) -> f64 {
    let f = p.floors;
    2.0 * (1.0 + 1.0 / f.a0 + 1.0 / f.b0)
        * (1.0 + p.a.sup_norm() + p.b.sup_norm() + p.c.sup_norm())
}

/// `||u||^2 + ||grad u||^2 + ||(-Delta)^{s/2} u||^2`, the quantity bounded by the a priori estimate.
pub fn apriori_quantity(u: &Field, s: f64) -> Result<f64> {
    check_order(s)?;
    let grid = *u.grid();
    let h = grid.cell_volume();
    let d = derivatives(&grid, u, s);
    let grad_sq: f64 = d.grad.iter().map(|g| dot(g, g)).sum::<f64>() * h;
    Ok(u.l2_norm_sq() + grad_sq + dot(&d.frac, &d.frac) * h)
}
