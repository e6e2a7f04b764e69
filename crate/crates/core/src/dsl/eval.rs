use super::{check_program, DslError, Env, Literal, Prim, Term, type_env, Value};
use crate::grid::Grid;
use crate::objects;

/// Runs a program on `input` with task variables from `env`.
///
/// The program is typechecked first; the result is always a valid grid.
pub fn eval(program: &Term, input: &Grid, env: &Env) -> Result<Grid, DslError> {
    check_program(program, &type_env(env))?;
    match eval_term(program, input, env)? {
        Value::Grid(g) => Ok(g),
        v => unreachable!("typechecked program produced {:?}", v.ty()),
    }
}

/// Evaluates any term without typechecking it first.
pub fn eval_term(term: &Term, input: &Grid, env: &Env) -> Result<Value, DslError> {
    let mut locals = Vec::new();
    Evaluator { input, env }.eval(term, &mut locals)
}

struct Evaluator<'a> {
    input: &'a Grid,
    env: &'a Env,
}

impl Evaluator<'_> {
    fn eval(&self, term: &Term, locals: &mut Vec<(String, Value)>) -> Result<Value, DslError> {
        match term {
            Term::Input => Ok(Value::Grid(self.input.clone())),
            Term::Lit(l) => Ok(Value::Lit(*l)),
            Term::Var(name) => {
                if let Some((_, v)) = locals.iter().rev().find(|(n, _)| n == name) {
                    return Ok(v.clone());
                }
                self.env
                    .get(name)
                    .map(|s| Value::Lit(Literal::from(*s)))
                    .ok_or_else(|| DslError::UnboundVariable(name.clone()))
            }
            Term::Prim(Prim::If, args) => match self.eval(&args[0], locals)? {
                Value::Lit(Literal::Bool(true)) => self.eval(&args[1], locals),
                Value::Lit(Literal::Bool(false)) => self.eval(&args[2], locals),
                v => unreachable!("typechecked condition {:?}", v.ty()),
            },
            Term::Prim(p, args) => {
                let values = args.iter().map(|a| self.eval(a, locals)).collect::<Result<Vec<_>, _>>()?;
                p.apply(values)
            }
            Term::Let { name, bound, body } => {
                let v = self.eval(bound, locals)?;
                locals.push((name.clone(), v));
                let out = self.eval(body, locals);
                locals.pop();
                out
            }
            Term::Map { binder, source, body } => {
                let items = self.objects(source, locals)?;
                let mut out = Vec::with_capacity(items.len());
                for obj in items {
                    locals.push((binder.clone(), Value::Object(obj)));
                    let v = self.eval(body, locals);
                    locals.pop();
                    match v? {
                        Value::Object(o) => out.push(o),
                        v => unreachable!("typechecked map body {:?}", v.ty()),
                    }
                }
                Ok(Value::Objects(out))
            }
            Term::Filter { binder, source, predicate } => {
                let items = self.objects(source, locals)?;
                let mut out = Vec::new();
                for obj in items {
                    locals.push((binder.clone(), Value::Object(obj)));
                    let keep = self.eval(predicate, locals);
                    let (_, Value::Object(obj)) = locals.pop().expect("pushed above") else {
                        unreachable!()
                    };
                    if keep? == Value::Lit(Literal::Bool(true)) {
                        out.push(obj);
                    }
                }
                Ok(Value::Objects(out))
            }
            Term::FoldOverlay { objects: objs, canvas } => {
                let items = self.objects(objs, locals)?;
                let Value::Grid(mut grid) = self.eval(canvas, locals)? else {
                    unreachable!("typechecked canvas")
                };
                for obj in &items {
                    grid = objects::overlay(&grid, obj)?;
                }
                Ok(Value::Grid(grid))
            }
        }
    }

    fn objects(&self, term: &Term, locals: &mut Vec<(String, Value)>) -> Result<Vec<objects::GridObject>, DslError> {
        match self.eval(term, locals)? {
            Value::Objects(o) => Ok(o),
            v => unreachable!("typechecked objects {:?}", v.ty()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::super::{Literal, Scalar};
    use super::*;
    use crate::grid::Color;
    use crate::objects::Connectivity;

    fn g(rows: &[&[i64]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn four() -> Term {
        lit(Literal::Connectivity(Connectivity::Four))
    }

    #[test]
    fn identity_and_rotation() {
        let grid = g(&[&[1, 2]]);
        assert_eq!(eval(&input(), &grid, &Env::new()).unwrap(), grid);
        let rot = prim(Prim::Rotate, vec![input(), int(2)]);
        assert_eq!(eval(&rot, &grid, &Env::new()).unwrap(), g(&[&[2, 1]]));
    }

    #[test]
    fn recolor_largest_to_variable() {
        // Sizes 3 and 1: the L-shaped 1-object is largest.
        let grid = g(&[&[1, 1, 0], &[1, 0, 0], &[0, 0, 2]]);
        let objs = prim(Prim::Objects, vec![input(), four(), color(0)]);
        let program = fold_overlay(
            map("o", prim(Prim::Largest, vec![objs]), prim(Prim::Recolor, vec![var("o"), var("C")])),
            input(),
        );
        let env = Env::from([("C".to_string(), Scalar::Color(Color::of(4)))]);
        let expected = g(&[&[4, 4, 0], &[4, 0, 0], &[0, 0, 2]]);
        assert_eq!(eval(&program, &grid, &env).unwrap(), expected);
        assert_eq!(eval(&program, &grid, &Env::new()), Err(DslError::UnboundVariable("C".into())));
    }

    #[test]
    fn filter_let_and_conditional() {
        let grid = g(&[&[1, 1, 0], &[0, 0, 0], &[0, 2, 0]]);
        let objs = prim(Prim::Objects, vec![input(), four(), color(0)]);
        let small = filter("o", objs, prim(Prim::Eq, vec![prim(Prim::Size, vec![var("o")]), int(1)]));
        let program = let_(
            "n",
            prim(Prim::CountObjects, vec![small.clone()]),
            prim(
                Prim::If,
                vec![
                    prim(Prim::Eq, vec![var("n"), int(1)]),
                    fold_overlay(map("o", small, prim(Prim::Recolor, vec![var("o"), color(5)])), input()),
                    input(),
                ],
            ),
        );
        assert_eq!(eval(&program, &grid, &Env::new()).unwrap(), g(&[&[1, 1, 0], &[0, 0, 0], &[0, 5, 0]]));
    }

    #[test]
    fn out_of_bounds_propagates() {
        let grid = g(&[&[1, 0], &[0, 0]]);
        let objs = prim(Prim::Objects, vec![input(), four(), color(0)]);
        let program = fold_overlay(map("o", objs, prim(Prim::Translate, vec![var("o"), int(0), int(5)])), input());
        assert!(matches!(eval(&program, &grid, &Env::new()), Err(DslError::OutOfBounds(_))));
    }

    #[test]
    fn degenerate_canvas() {
        let program = prim(Prim::Canvas, vec![int(0), int(3), color(0)]);
        assert!(matches!(eval(&program, &g(&[&[1]]), &Env::new()), Err(DslError::DegenerateResult(_))));
    }

    #[test]
    fn evaluation_is_repeatable() {
        let grid = g(&[&[1, 0, 3], &[0, 2, 0]]);
        let program = prim(Prim::Gravity, vec![prim(Prim::Reflect, vec![input(), lit(Literal::Axis(crate::objects::Axis::Vertical))]), lit(Literal::Direction(super::super::Direction::Bottom)), color(0)]);
        let a = eval(&program, &grid, &Env::new()).unwrap();
        let b = eval(&program, &grid, &Env::new()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, g(&[&[0, 0, 0], &[3, 2, 1]]));
    }
}
