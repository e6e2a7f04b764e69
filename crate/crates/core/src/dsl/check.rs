use std::collections::{BTreeMap, BTreeSet};

use super::prims::Signature;
use super::{DslError, Env, Prim, Term, Type};

/// Types of the free variables a program may mention.
pub type TypeEnv = BTreeMap<String, Type>;

/// Variable types implied by a task-variable environment.
pub fn type_env(env: &Env) -> TypeEnv {
    env.iter().map(|(k, v)| (k.clone(), v.ty())).collect()
}

/// Type of every node, keyed by path. The root has the empty path; child
/// `i` of node `p` has path `p.i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeAssignment {
    pub types: BTreeMap<String, Type>,
}

impl TypeAssignment {
    pub fn root(&self) -> Type {
        self.types[""]
    }
}

/// Assigns a type to every node of `term` or reports the first mismatch.
pub fn typecheck(term: &Term, vars: &TypeEnv) -> Result<TypeAssignment, DslError> {
    let mut types = BTreeMap::new();
    let mut scope: Vec<(String, Type)> = Vec::new();
    infer(term, vars, &mut scope, String::new(), &mut types)?;
    Ok(TypeAssignment { types })
}

/// Typechecks a whole program, which must denote a grid.
pub fn check_program(term: &Term, vars: &TypeEnv) -> Result<TypeAssignment, DslError> {
    let assignment = typecheck(term, vars)?;
    expect("root", Type::Grid, assignment.root())?;
    Ok(assignment)
}

fn child(path: &str, i: usize) -> String {
    if path.is_empty() {
        i.to_string()
    } else {
        format!("{path}.{i}")
    }
}

fn expect(location: &str, expected: Type, found: Type) -> Result<(), DslError> {
    if expected == found {
        Ok(())
    } else {
        Err(DslError::Type { location: location.to_string(), expected: expected.to_string(), found: found.to_string() })
    }
}

fn loc(path: &str) -> &str {
    if path.is_empty() {
        "root"
    } else {
        path
    }
}

fn infer(
    term: &Term,
    vars: &TypeEnv,
    scope: &mut Vec<(String, Type)>,
    path: String,
    types: &mut BTreeMap<String, Type>,
) -> Result<Type, DslError> {
    let ty = match term {
        Term::Input => Type::Grid,
        Term::Lit(l) => l.ty(),
        Term::Var(name) => scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
            .or_else(|| vars.get(name).copied())
            .ok_or_else(|| DslError::UnboundVariable(name.clone()))?,
        Term::Prim(p, args) => {
            let arg_types = args
                .iter()
                .enumerate()
                .map(|(i, a)| infer(a, vars, scope, child(&path, i), types))
                .collect::<Result<Vec<_>, _>>()?;
            prim_result(*p, &arg_types, &path)?
        }
        Term::Let { name, bound, body } => {
            let bound_ty = infer(bound, vars, scope, child(&path, 0), types)?;
            scope.push((name.clone(), bound_ty));
            let body_ty = infer(body, vars, scope, child(&path, 1), types);
            scope.pop();
            body_ty?
        }
        Term::Map { binder, source, body } => {
            let src = infer(source, vars, scope, child(&path, 0), types)?;
            expect(&child(&path, 0), Type::Objects, src)?;
            scope.push((binder.clone(), Type::Object));
            let body_ty = infer(body, vars, scope, child(&path, 1), types);
            scope.pop();
            expect(&child(&path, 1), Type::Object, body_ty?)?;
            Type::Objects
        }
        Term::Filter { binder, source, predicate } => {
            let src = infer(source, vars, scope, child(&path, 0), types)?;
            expect(&child(&path, 0), Type::Objects, src)?;
            scope.push((binder.clone(), Type::Object));
            let pred_ty = infer(predicate, vars, scope, child(&path, 1), types);
            scope.pop();
            expect(&child(&path, 1), Type::Bool, pred_ty?)?;
            Type::Objects
        }
        Term::FoldOverlay { objects, canvas } => {
            let o = infer(objects, vars, scope, child(&path, 0), types)?;
            expect(&child(&path, 0), Type::Objects, o)?;
            let c = infer(canvas, vars, scope, child(&path, 1), types)?;
            expect(&child(&path, 1), Type::Grid, c)?;
            Type::Grid
        }
    };
    types.insert(path, ty);
    Ok(ty)
}

fn prim_result(p: Prim, args: &[Type], path: &str) -> Result<Type, DslError> {
    let arity_error = |expected: String| DslError::Type {
        location: loc(path).to_string(),
        expected: format!("{} with {expected}", p.name()),
        found: format!("{} argument(s)", args.len()),
    };
    match p.signature() {
        Signature::Fixed(params, ret) => {
            if params.len() != args.len() {
                return Err(arity_error(format!("{} argument(s)", params.len())));
            }
            for (i, (want, got)) in params.iter().zip(args).enumerate() {
                expect(&child(path, i), *want, *got)?;
            }
            Ok(ret)
        }
        Signature::SameScalar => {
            if args.len() != 2 {
                return Err(arity_error("2 arguments".into()));
            }
            if !args[0].is_scalar() {
                return Err(DslError::Type {
                    location: child(path, 0),
                    expected: "scalar".into(),
                    found: args[0].to_string(),
                });
            }
            expect(&child(path, 1), args[0], args[1])?;
            Ok(Type::Bool)
        }
        Signature::Conditional => {
            if args.len() != 3 {
                return Err(arity_error("3 arguments".into()));
            }
            expect(&child(path, 0), Type::Bool, args[0])?;
            expect(&child(path, 2), args[1], args[2])?;
            Ok(args[1])
        }
        Signature::ColorPairs => {
            if args.len() < 3 || args.len().is_multiple_of(2) {
                return Err(arity_error("a grid and one or more color pairs".into()));
            }
            expect(&child(path, 0), Type::Grid, args[0])?;
            for (i, t) in args.iter().enumerate().skip(1) {
                expect(&child(path, i), Type::Color, *t)?;
            }
            Ok(Type::Grid)
        }
    }
}

/// Variable names referenced but not bound by `let`, `map` or `filter`.
pub fn free_vars(term: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    collect_free(term, &mut bound, &mut out);
    out
}

fn collect_free(term: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match term {
        Term::Var(name) => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        Term::Input | Term::Lit(_) => {}
        Term::Prim(_, args) => args.iter().for_each(|a| collect_free(a, bound, out)),
        Term::Let { name, bound: value, body } => {
            collect_free(value, bound, out);
            bound.push(name.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::Map { binder, source, body: inner } | Term::Filter { binder, source, predicate: inner } => {
            collect_free(source, bound, out);
            bound.push(binder.clone());
            collect_free(inner, bound, out);
            bound.pop();
        }
        Term::FoldOverlay { objects, canvas } => {
            collect_free(objects, bound, out);
            collect_free(canvas, bound, out);
        }
    }
}
