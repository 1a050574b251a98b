//! Small hand-built models used throughout the tests, the CLI fixtures and the
//! documentation.

use crate::model::{Cmdp, CmdpBuilder, Probability};

/// Five states `s, t, r, u, v`, reloads `{r, t}`, capacity 20.
///
/// In `s`, action `a` costs 2 and returns to reload `r`; action `b` costs 5
/// and reaches target `t` or `u` with probability 1/2 each. From `u` the only
/// way home is `u -> v -> s` (costs 1 and 2). `t` loops on itself at cost 1.
pub fn detour() -> Cmdp {
    let mut b = CmdpBuilder::new(20);
    let s = b.add_state("s", false);
    let t = b.add_state("t", true);
    let r = b.add_state("r", true);
    let u = b.add_state("u", false);
    let v = b.add_state("v", false);
    let half = Probability::ratio(1, 2);
    b.add_move(s, "a", 2, r).add_action(s, "b", 5, [(t, half), (u, half)]);
    for name in ["a", "b"] {
        b.add_move(t, name, 1, t).add_move(r, name, 1, s).add_move(u, name, 1, v).add_move(v, name, 2, s);
    }
    b.build().expect("well-formed example")
}

/// A chain of reloads `u, v, w, x` where `w` can slip into the trap `y`.
/// Capacity 10; only `u` survives as a usable reload.
pub fn reload_chain() -> Cmdp {
    let mut b = CmdpBuilder::new(10);
    let t = b.add_state("t", false);
    let u = b.add_state("u", true);
    let v = b.add_state("v", true);
    let w = b.add_state("w", true);
    let x = b.add_state("x", true);
    let y = b.add_state("y", false);
    b.add_move(t, "a", 3, u)
        .add_move(u, "a", 2, t)
        .add_move(u, "b", 1, v)
        .add_move(v, "a", 1, w)
        .add_action(w, "a", 1, [(x, Probability::ratio(9, 10)), (y, Probability::ratio(1, 10))])
        .add_move(x, "a", 2, w)
        .add_move(y, "a", 1, y);
    b.build().expect("well-formed example")
}

/// [`reload_chain`] with `w` no longer a reload.
pub fn reload_chain_without_w() -> Cmdp {
    let model = reload_chain();
    let mut reload = model.reload_mask();
    reload[model.state_by_name("w").unwrap()] = false;
    model.with_reloads(&reload)
}

fn two_route(cost_of_b: u64) -> Cmdp {
    let mut b = CmdpBuilder::new(3);
    let s = b.add_state("s", false);
    let t = b.add_state("t", true);
    let u = b.add_state("u", false);
    let v = b.add_state("v", false);
    let r = b.add_state("r", true);
    b.add_move(s, "a", 1, u).add_action(
        s,
        "b",
        cost_of_b,
        [(v, Probability::ratio(1, 10)), (r, Probability::ratio(9, 10))],
    );
    for name in ["a", "b"] {
        b.add_move(t, name, 1, t).add_move(u, name, 1, t).add_move(v, name, 0, t).add_move(r, name, 1, s);
    }
    b.build().expect("well-formed example")
}

/// Target `t` reached from `s` either surely in two steps (`a`) or by a
/// 1/10 gamble (`b`, cost 2) that otherwise detours through reload `r`.
/// Capacity 3.
pub fn goal_leaning() -> Cmdp {
    two_route(2)
}

/// [`goal_leaning`] with the gamble made cheaper (`b` costs 1).
pub fn threshold() -> Cmdp {
    two_route(1)
}

/// Reload `s` with a fair split `a` to `u`/`v` and a biased `b` that reaches
/// `v` with probability 6/10 or stays in `s`. Every action costs 1; capacity 2.
pub fn leaning_limit() -> Cmdp {
    let mut b = CmdpBuilder::new(2);
    let s = b.add_state("s", true);
    let t = b.add_state("t", true);
    let u = b.add_state("u", false);
    let v = b.add_state("v", false);
    let half = Probability::ratio(1, 2);
    b.add_action(s, "a", 1, [(u, half), (v, half)]).add_action(
        s,
        "b",
        1,
        [(v, Probability::ratio(6, 10)), (s, Probability::ratio(4, 10))],
    );
    for name in ["a", "b"] {
        b.add_move(t, name, 1, t).add_move(u, name, 1, t).add_move(v, name, 1, t);
    }
    b.build().expect("well-formed example")
}
