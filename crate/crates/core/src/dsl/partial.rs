use super::{free_vars, typecheck, DslError, Env, Literal, Prim, Term, type_env, Value};

/// Inlines every free variable of `program` from `env` and folds scalar
/// sub-terms that do not depend on the input grid or on object binders.
///
/// The result is closed, and for every grid `g`,
/// `eval(result, g, {}) == eval(program, g, env)`.
pub fn partial_eval(program: &Term, env: &Env) -> Result<Term, DslError> {
    if let Some(missing) = free_vars(program).into_iter().find(|v| !env.contains_key(v)) {
        return Err(DslError::UnboundVariable(missing));
    }
    typecheck(program, &type_env(env))?;
    let mut scope = Vec::new();
    Ok(specialize(program, env, &mut scope))
}

/// What a name refers to at a given point of the term.
enum Binding {
    /// Bound at runtime (object binders, non-constant lets).
    Dynamic(String),
    /// A let whose bound value folded to a literal.
    Known(String, Literal),
}

fn lookup<'a>(scope: &'a [Binding], name: &str) -> Option<&'a Binding> {
    scope.iter().rev().find(|b| match b {
        Binding::Dynamic(n) | Binding::Known(n, _) => n == name,
    })
}

fn specialize(term: &Term, env: &Env, scope: &mut Vec<Binding>) -> Term {
    match term {
        Term::Input | Term::Lit(_) => term.clone(),
        Term::Var(name) => match lookup(scope, name) {
            Some(Binding::Dynamic(_)) => term.clone(),
            Some(Binding::Known(_, lit)) => Term::Lit(*lit),
            None => Term::Lit(Literal::from(env[name])),
        },
        Term::Prim(Prim::If, args) => {
            let cond = specialize(&args[0], env, scope);
            match cond {
                Term::Lit(Literal::Bool(true)) => specialize(&args[1], env, scope),
                Term::Lit(Literal::Bool(false)) => specialize(&args[2], env, scope),
                cond => Term::Prim(
                    Prim::If,
                    vec![cond, specialize(&args[1], env, scope), specialize(&args[2], env, scope)],
                ),
            }
        }
        Term::Prim(p, args) => {
            let args: Vec<Term> = args.iter().map(|a| specialize(a, env, scope)).collect();
            fold(*p, &args).unwrap_or(Term::Prim(*p, args))
        }
        Term::Let { name, bound, body } => {
            let bound = specialize(bound, env, scope);
            if let Term::Lit(lit) = bound {
                scope.push(Binding::Known(name.clone(), lit));
                let body = specialize(body, env, scope);
                scope.pop();
                body
            } else {
                scope.push(Binding::Dynamic(name.clone()));
                let body = specialize(body, env, scope);
                scope.pop();
                Term::Let { name: name.clone(), bound: Box::new(bound), body: Box::new(body) }
            }
        }
        Term::Map { binder, source, body } => {
            let source = specialize(source, env, scope);
            scope.push(Binding::Dynamic(binder.clone()));
            let body = specialize(body, env, scope);
            scope.pop();
            Term::Map { binder: binder.clone(), source: Box::new(source), body: Box::new(body) }
        }
        Term::Filter { binder, source, predicate } => {
            let source = specialize(source, env, scope);
            scope.push(Binding::Dynamic(binder.clone()));
            let predicate = specialize(predicate, env, scope);
            scope.pop();
            Term::Filter { binder: binder.clone(), source: Box::new(source), predicate: Box::new(predicate) }
        }
        Term::FoldOverlay { objects, canvas } => Term::FoldOverlay {
            objects: Box::new(specialize(objects, env, scope)),
            canvas: Box::new(specialize(canvas, env, scope)),
        },
    }
}

/// Evaluates a primitive whose arguments are all literals, when the result
/// is itself a literal. Failures are left for runtime to report.
fn fold(p: Prim, args: &[Term]) -> Option<Term> {
    let values = args
        .iter()
        .map(|a| match a {
            Term::Lit(l) => Some(Value::Lit(*l)),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()?;
    match p.apply(values).ok()? {
        Value::Lit(l) => Some(Term::Lit(l)),
        _ => None,
    }
}
