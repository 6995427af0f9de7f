use thiserror::Error;

use super::{BinOp, Expr, Func, Params};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter '{0}'")]
    UnboundParameter(String),

    /// A finite argument outside the domain of an operation.
    #[error("domain error in '{expr}' at argument {arg}")]
    Domain { expr: String, arg: f64 },

    /// An intermediate overflowed and produced an indeterminate form.
    #[error("non-finite intermediate in '{expr}'")]
    NonFinite { expr: String },
}

fn fail(node: &Expr, arg: f64, inputs_finite: bool) -> EvalError {
    if inputs_finite {
        EvalError::Domain { expr: node.to_string(), arg }
    } else {
        EvalError::NonFinite { expr: node.to_string() }
    }
}

/// Evaluates `e` at `t`. NaN is never returned: any operation producing NaN
/// reports a domain error (finite inputs) or a non-finite error (overflowed
/// inputs).
pub fn eval_expr(e: &Expr, t: f64, params: &Params) -> Result<f64, EvalError> {
    match e {
        Expr::Num(x) => Ok(*x),
        Expr::Var => Ok(t),
        Expr::Euler => Ok(std::f64::consts::E),
        Expr::Param(name) => params
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundParameter(name.clone())),
        Expr::Neg(a) => Ok(-eval_expr(a, t, params)?),
        Expr::Bin(op, a, b) => {
            let x = eval_expr(a, t, params)?;
            let y = eval_expr(b, t, params)?;
            let r = match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            };
            if r.is_nan() {
                let arg = if *op == BinOp::Pow { x } else { y };
                return Err(fail(e, arg, x.is_finite() && y.is_finite()));
            }
            Ok(r)
        }
        Expr::Call(func, args) => {
            let x = eval_expr(&args[0], t, params)?;
            let y = match args.get(1) {
                Some(b) => eval_expr(b, t, params)?,
                None => 0.0,
            };
            let r = match func {
                Func::Log if x <= 0.0 => return Err(fail(e, x, true)),
                Func::Sqrt if x < 0.0 => return Err(fail(e, x, true)),
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Abs => x.abs(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Pow => x.powf(y),
                Func::Min => x.min(y),
                Func::Max => x.max(y),
            };
            if r.is_nan() {
                return Err(fail(e, x, x.is_finite() && y.is_finite()));
            }
            Ok(r)
        }
    }
}
