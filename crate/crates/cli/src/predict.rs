use clap::ValueEnum;
use serde_json::json;
use stark_core::predictions::{
    counting_limit_first, counting_limit_second, density_limit, first_order_shift,
    perturbed_counting_limit, rough_weyl, semiclassical_constant, three_term_eigenvalue,
    weyl_phase_space, DensityLimit,
};
use stark_core::{LimitParams, Regime, TestPotential};

use crate::args::{PredictArgs, PredictKind, RegimeArg, WeylModel};
use crate::{status, Failure};

/// Parses `zero`, `gaussian:A,sc,tc,σs,σt`, `bump:A,sc,tc,rs,rt` or `box:v,s0,s1,t0,t1`.
pub fn parse_potential(spec: &str) -> Result<TestPotential, Failure> {
    let (shape, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(format!("potential `{spec}`: {e}")))?
    };
    let need = |n: usize| {
        if nums.len() == n {
            Ok(())
        } else {
            Err(Failure::usage(format!(
                "potential `{shape}` takes {n} numbers, got {}",
                nums.len()
            )))
        }
    };
    let v = match shape {
        "zero" => {
            need(0)?;
            TestPotential::zero()
        }
        "gaussian" => {
            need(5)?;
            TestPotential::gaussian(nums[0], [nums[1], nums[2]], [nums[3], nums[4]])
        }
        "bump" => {
            need(5)?;
            TestPotential::product_bump(nums[0], [nums[1], nums[2]], [nums[3], nums[4]])
        }
        "box" => {
            need(5)?;
            TestPotential::constant_box(nums[0], [nums[1], nums[2]], [nums[3], nums[4]])
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown potential shape `{other}` (zero, gaussian, bump, box)"
            )))
        }
    };
    v.validate().map_err(Failure::from)?;
    Ok(v)
}

/// Six significant digits, the precision used for human-readable output.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

struct Prediction {
    value: f64,
    extra: Vec<(&'static str, f64)>,
    formula: &'static str,
}

fn regime(a: &PredictArgs) -> Regime {
    match a.regime {
        RegimeArg::First => Regime::First,
        RegimeArg::Second => Regime::Second { alpha: a.alpha },
    }
}

fn potential(a: &PredictArgs) -> Result<TestPotential, Failure> {
    match &a.potential {
        Some(p) => parse_potential(p),
        None => Err(Failure::usage(format!(
            "predict {:?} needs --potential",
            a.kind
        ))),
    }
}

fn evaluate(a: &PredictArgs) -> Result<Prediction, Failure> {
    let params = LimitParams::new(a.gamma, a.mu, a.kappa0)
        .with_alpha(a.alpha)
        .with_x0(a.x0);
    let p = |value, formula| Prediction {
        value,
        extra: Vec::new(),
        formula,
    };
    Ok(match a.kind {
        PredictKind::Constant => p(
            semiclassical_constant(a.gamma, a.d)?,
            "L_{γ,d} = Γ(γ+1) / ((4π)^{d/2} Γ(γ+1+d/2))",
        ),
        PredictKind::Weyl => {
            if !(1..=2).contains(&a.d) {
                return Err(Failure::usage(format!(
                    "weyl supports d = 1 or 2, got {}",
                    a.d
                )));
            }
            let (lower, upper, value) = match a.model {
                WeylModel::Box => (vec![0.0; a.d], vec![1.0; a.d], None),
                WeylModel::Oscillator => {
                    if !(a.kappa0 > 0.0) {
                        return Err(Failure::usage("--kappa0 must be positive"));
                    }
                    let r = (2.0 * a.lambda.max(0.0) / a.kappa0).sqrt();
                    (vec![-r; a.d], vec![r; a.d], (r == 0.0).then_some(0.0))
                }
            };
            let kappa0 = a.kappa0;
            let v = move |x: &[f64]| match a.model {
                WeylModel::Box => 0.0,
                WeylModel::Oscillator => 0.5 * kappa0 * x.iter().map(|y| y * y).sum::<f64>(),
            };
            let value = match value {
                Some(v) => v,
                None => weyl_phase_space(v, &lower, &upper, a.lambda)?,
            };
            p(value, "L_{0,d} ∫ (Λ − V)₊^{d/2} dx")
        }
        PredictKind::Expansion => p(
            three_term_eigenvalue(a.k, a.h, &params)?,
            "x₀ + z₁h^{2/3} + (2k−1)√(κ₀/2) h",
        ),
        PredictKind::CountingFirst => p(
            counting_limit_first(&params)?,
            "(4π L_{γ,2} / √(2κ₀)) Σ_k (μ − z_k)₊^{γ+1}",
        ),
        PredictKind::CountingSecond => p(
            counting_limit_second(&params)?,
            "(4π L_{γ,2} / √(2κ₀)) μ^{γ+1}",
        ),
        PredictKind::RoughWeyl => {
            if !(a.mu >= 0.0 && a.kappa0 > 0.0) {
                return Err(Failure::usage("rough-weyl needs μ ≥ 0 and κ₀ > 0"));
            }
            let (value, scale) = rough_weyl(a.mu, a.kappa0);
            Prediction {
                value,
                extra: vec![("relative_remainder_scale", scale)],
                formula: "4μ^{5/2} / (15π√(2κ₀)), remainder scale μ^{−3/4}",
            }
        }
        PredictKind::Density => match &a.potential {
            None => p(
                density_limit(a.s, a.t, &params, regime(a))?,
                "(1/π) Σ_k (μ − (κ₀/2)s² − z_k)₊^{1/2} a_k(t)²",
            ),
            Some(_) => p(
                DensityLimit::new(&params, regime(a))?.integrate(Some(&potential(a)?))?,
                "∫∫ ρ_lim(s,t) V(s,t) ds dt",
            ),
        },
        PredictKind::Shift => p(
            first_order_shift(a.s, &potential(a)?, a.k)?,
            "∫ V(s,t) a_k(t)² dt",
        ),
        PredictKind::Perturbed => p(
            perturbed_counting_limit(&params, &potential(a)?, regime(a))?,
            "L_{γ,1} Σ_j ∫ (μ − (κ₀/2)s² − λ_j(s;V))₊^{γ+1/2} ds",
        ),
    })
}

pub fn run(a: &PredictArgs, machine: bool) -> Result<u8, Failure> {
    let out = evaluate(a)?;
    let name = a
        .kind
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    if machine {
        let mut doc = json!({
            "kind": name,
            "value": out.value,
            "formula": out.formula,
            "inputs": {
                "gamma": a.gamma, "mu": a.mu, "kappa0": a.kappa0, "alpha": a.alpha, "x0": a.x0,
                "d": a.d, "k": a.k, "h": a.h, "s": a.s, "t": a.t, "lambda": a.lambda,
                "potential": a.potential,
            },
        });
        for (k, v) in &out.extra {
            doc[*k] = json!(v);
        }
        println!("{doc}");
    } else {
        println!("{name} = {}", sig6(out.value));
        for (k, v) in &out.extra {
            println!("{k} = {}", sig6(*v));
        }
        println!("formula: {}", out.formula);
    }
    Ok(status::PASS)
}
