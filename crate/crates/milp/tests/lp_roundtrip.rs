//! Property test: IR -> LP text -> internal reader reproduces every
//! coefficient to 1e-12.

use proptest::prelude::*;
use rep2h_milp::lpfile::{parse_lp, write_lp};
use rep2h_milp::{LinExpr, ModelIR, ObjSense, Sense, VarKind};

#[derive(Debug, Clone)]
struct RawModel {
    maximize: bool,
    vars: Vec<(f64, f64, u8)>, // lo span kind
    rows: Vec<(Vec<(usize, f64)>, u8, f64)>,
    obj: Vec<(usize, f64)>,
    offset: f64,
}

fn coef() -> BoxedStrategy<f64> {
    prop_oneof![
        (-1e6..1e6f64),
        (-1.0..1.0f64).prop_map(|v| v * 1e-6),
        Just(1.0),
        Just(-2.44),
    ]
    .boxed()
}

fn raw_model() -> impl Strategy<Value = RawModel> {
    let var = ((-100.0..100.0f64), (0.0..50.0f64), 0u8..3);
    (any::<bool>(), prop::collection::vec(var, 1..8), 0.0f64..10.0).prop_flat_map(
        |(maximize, vars, offset)| {
            let n = vars.len();
            let term = (0..n, coef());
            let row = (prop::collection::vec(term.clone(), 1..5), 0u8..3, coef());
            (
                Just(maximize),
                Just(vars),
                prop::collection::vec(row, 0..6),
                prop::collection::vec((0..n, coef()), 0..n + 1),
                Just(offset),
            )
                .prop_map(|(maximize, vars, rows, obj, offset)| RawModel {
                    maximize,
                    vars,
                    rows,
                    obj,
                    offset,
                })
        },
    )
}

fn build(raw: &RawModel) -> ModelIR {
    let mut ir =
        ModelIR::new(if raw.maximize { ObjSense::Maximize } else { ObjSense::Minimize });
    let mut ids = Vec::new();
    for (i, (lo, span, kind)) in raw.vars.iter().enumerate() {
        let kind = match kind {
            0 => VarKind::Continuous,
            1 => VarKind::Binary,
            _ => VarKind::Integer,
        };
        let (lo, hi) = if kind == VarKind::Binary {
            (0.0, 1.0)
        } else {
            (*lo, lo + span)
        };
        ids.push(ir.add_var(format!("v{i}"), lo, hi, kind).unwrap());
    }
    for (k, (terms, sense, rhs)) in raw.rows.iter().enumerate() {
        let mut expr = LinExpr::new();
        for (vi, c) in terms {
            expr = expr.add(ids[*vi], *c);
        }
        let sense = match sense {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        ir.add_row(format!("r{k}"), expr, sense, *rhs).unwrap();
    }
    for (vi, c) in &raw.obj {
        ir.obj_add_coef(ids[*vi], *c);
    }
    ir.obj_add_offset(raw.offset);
    ir
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn roundtrip_is_faithful(raw in raw_model()) {
        let ir = build(&raw);
        let text = write_lp(&ir).unwrap();
        let back = parse_lp(&text).unwrap();
        prop_assert_eq!(back.n_vars(), ir.n_vars());
        prop_assert_eq!(back.rows().len(), ir.rows().len());
        for a in ir.vars() {
            let b = &back.vars()[back.lookup(&a.name).unwrap().index()];
            prop_assert_eq!(a.kind, b.kind);
            prop_assert!((a.lo - b.lo).abs() <= 1e-12 * a.lo.abs().max(1.0));
            prop_assert!((a.hi - b.hi).abs() <= 1e-12 * a.hi.abs().max(1.0));
        }
        for (ra, rb) in ir.rows().iter().zip(back.rows()) {
            prop_assert_eq!(&ra.name, &rb.name);
            prop_assert_eq!(ra.sense, rb.sense);
            prop_assert!((ra.rhs - rb.rhs).abs() <= 1e-12 * ra.rhs.abs().max(1.0));
            let by_name: std::collections::HashMap<&str, f64> =
                rb.terms.iter().map(|(v, c)| (back.vars()[v.index()].name.as_str(), *c)).collect();
            for (v, c) in &ra.terms {
                let cb = by_name[ir.vars()[v.index()].name.as_str()];
                prop_assert!((c - cb).abs() <= 1e-12 * c.abs().max(1.0));
            }
        }
        let (_, ka) = ir.objective();
        let (ob, kb) = back.objective();
        prop_assert!((ka - kb).abs() <= 1e-12 * ka.abs().max(1.0));
        let (oa, _) = ir.objective();
        for (v, ca) in oa.iter().enumerate() {
            let id = back.lookup(&ir.vars()[v].name).unwrap();
            prop_assert!((ca - ob[id.index()]).abs() <= 1e-12 * ca.abs().max(1.0));
        }
    }
}
