//! Random tiny models and lassos for cross-checking the checker.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::Model;
use crate::error::Result;
use crate::lts::{Lasso, Limits, Path, StateId, ThreadId};
use crate::registers::RegisterKind;
use crate::threads::ir::build::*;
use crate::threads::ir::{Stmt, ThreadProgram};
use crate::threads::{compile_thread, RegisterArray, RegisterTable};

fn cond(rng: &mut ChaCha8Rng) -> crate::threads::ir::Expr {
    eq(rs("x"), c(rng.random_range(0..2)))
}

fn block(rng: &mut ChaCha8Rng, depth: u32) -> Vec<Stmt> {
    let len = rng.random_range(1..=2);
    (0..len).map(|_| stmt(rng, depth)).collect()
}

fn stmt(rng: &mut ChaCha8Rng, depth: u32) -> Stmt {
    let pick = if depth == 0 { rng.random_range(0..2) } else { rng.random_range(0..5) };
    match pick {
        0 => write(sc("x"), c(rng.random_range(0..2))),
        1 => await_(cond(rng)),
        2 => if_else(cond(rng), block(rng, depth - 1), block(rng, depth - 1)),
        3 => while_(cond(rng), block(rng, depth - 1)),
        _ => repeat_until(block(rng, depth - 1), cond(rng)),
    }
}

fn program(rng: &mut ChaCha8Rng, thread: ThreadId) -> ThreadProgram {
    ThreadProgram { thread, entry: block(rng, 1), exit: block(rng, 1) }
}

/// A random two-thread model over one binary register of the given kind,
/// with at most `max_states` reachable states.
pub fn random_model(seed: u64, kind: RegisterKind, max_states: usize) -> Result<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = RegisterTable::new(&[RegisterArray::scalar("x", vec![0, 1], 0)])?;
    let limits = Limits { max_states: Some(max_states as u64), ..Limits::default() };
    loop {
        let threads = (0..2).map(|t| compile_thread(&program(&mut rng, t), &table)).collect::<Result<Vec<_>>>()?;
        match Model::compose(threads, &table.configs(kind), &limits) {
            Ok(m) => return Ok(m),
            Err(crate::Error::CapExceeded { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// A random walk from the initial state, closed into a lasso at the first
/// repeated state or stopped at a state without successors.
pub fn random_lasso(m: &Model, rng: &mut impl Rng) -> Lasso {
    let lts = m.lts();
    let mut seen: HashMap<StateId, usize> = HashMap::new();
    let mut path = Path::new(lts.initial());
    loop {
        let s = path.end();
        if let Some(&i) = seen.get(&s) {
            let cycle = path.steps.split_off(i);
            return Lasso { prefix: path, cycle };
        }
        seen.insert(s, path.steps.len());
        let out = lts.out(s);
        if out.is_empty() {
            return Lasso { prefix: path, cycle: Vec::new() };
        }
        let e = out[rng.random_range(0..out.len())];
        path.push(e.label, e.target);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_respect_the_bound_and_are_reproducible() {
        for seed in 0..5 {
            let a = random_model(seed, RegisterKind::Atomic, 200).unwrap();
            let b = random_model(seed, RegisterKind::Atomic, 200).unwrap();
            assert!(a.num_states() <= 200);
            assert_eq!(a.lts(), b.lts());
        }
    }

    #[test]
    fn lassos_replay() {
        let m = random_model(7, RegisterKind::Regular, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            random_lasso(&m, &mut rng).replay(m.lts()).unwrap();
        }
    }
}
