//! Built-in mutual exclusion algorithms.
//!
//! Unless an algorithm states otherwise, registers start at the lowest value
//! of their domain. Thread `i` is the running thread and, for two-thread
//! algorithms, `j = 1 - i`.

use super::ir::build::*;
use super::ir::{Expr, Stmt, ThreadProgram};
use super::{AlgorithmSpec, RegisterArray};
use crate::error::{Error, Result};
use crate::lts::{ThreadId, Value};

/// One supported (algorithm, variant) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub variant: &'static str,
    /// Row label in the results matrix.
    pub row: &'static str,
    /// Thread count used in the results matrix.
    pub threads: usize,
    /// Whether the algorithm is defined for two threads only.
    pub two_only: bool,
    /// Whether the entry is a row of the results matrix.
    pub tabulated: bool,
}

const fn entry(name: &'static str, variant: &'static str, row: &'static str, threads: usize, two_only: bool) -> CatalogEntry {
    CatalogEntry { name, variant, row, threads, two_only, tabulated: true }
}

const ENTRIES: &[CatalogEntry] = &[
    entry("anderson", "base", "Anderson", 2, true),
    entry("aravind_blru", "base", "Aravind BLRU", 3, false),
    entry("aravind_blru", "alt", "Aravind BLRU alt.", 3, false),
    entry("attiya_welch", "orig", "Attiya-Welch orig.", 2, true),
    entry("attiya_welch", "orig_alt", "Attiya-Welch orig. alt.", 2, true),
    entry("attiya_welch", "var", "Attiya-Welch var.", 2, true),
    entry("attiya_welch", "var_alt", "Attiya-Welch var. alt.", 2, true),
    entry("burns_lynch", "base", "Burns-Lynch", 3, false),
    entry("dekker", "base", "Dekker", 2, true),
    entry("dekker", "alt", "Dekker alt.", 2, true),
    entry("dekker", "rw_safe", "Dekker RW-safe", 2, true),
    entry("dftosf", "dekker_rwsafe", "Dekker RW-safe DFtoSF", 2, true),
    entry("dijkstra", "base", "Dijkstra", 3, false),
    entry("kessels", "base", "Kessels", 2, true),
    entry("knuth", "base", "Knuth", 3, false),
    entry("lamport1bit", "base", "Lamport 1-bit", 3, false),
    entry("dftosf", "lamport1bit", "Lamport 1-bit DFtoSF", 3, false),
    entry("lamport3bit", "base", "Lamport 3-bit", 3, false),
    entry("peterson", "base", "Peterson", 2, true),
    entry("szymanski_flag", "int", "Szymanski flag (int)", 3, false),
    entry("szymanski_flag", "bit", "Szymanski flag (bit)", 3, false),
    CatalogEntry { tabulated: false, ..entry("szymanski_flag", "bit_alt", "Szymanski flag (bit) alt.", 3, false) },
    entry("szymanski_3bit", "base", "Szymanski 3-bit lin. wait", 3, false),
    entry("szymanski_3bit", "alt", "Szymanski 3-bit lin. wait alt.", 2, false),
];

/// Largest thread count accepted for N-thread algorithms.
pub const MAX_THREADS: usize = 6;

pub fn catalog_entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn find_entry(name: &str, variant: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name && e.variant == variant)
}

type Protocol = (Vec<Stmt>, Vec<Stmt>);

/// Instantiates an algorithm for `n` threads.
pub fn algorithm_catalog(name: &str, variant: &str, n: usize) -> Result<AlgorithmSpec> {
    let unknown = || Error::UnknownAlgorithm { name: name.into(), variant: variant.into(), threads: n };
    let e = find_entry(name, variant).ok_or_else(unknown)?;
    if !(2..=MAX_THREADS).contains(&n) || (e.two_only && n != 2) {
        return Err(unknown());
    }
    let nn = n as Value;
    let (registers, body): (Vec<RegisterArray>, Box<dyn Fn(Value) -> Protocol>) = match (name, variant) {
        ("peterson", _) => (flag_turn(), Box::new(peterson)),
        ("dekker", v) => {
            let v = v.to_string();
            (flag_turn(), Box::new(move |i| dekker(i, &v)))
        }
        ("anderson", _) => (
            vec![
                RegisterArray::booleans("p", 2, true),
                RegisterArray::booleans("q", 2, true),
                RegisterArray::booleans("t", 2, true),
            ],
            Box::new(anderson),
        ),
        ("attiya_welch", v) => {
            let v = v.to_string();
            (flag_turn(), Box::new(move |i| attiya_welch(i, &v)))
        }
        ("burns_lynch", _) => (vec![RegisterArray::booleans("flag", n, false)], Box::new(move |i| burns_lynch(i, nn))),
        ("lamport1bit", _) => (vec![RegisterArray::booleans("flag", n, false)], Box::new(move |i| lamport1bit(i, nn))),
        ("dftosf", "lamport1bit") => {
            let mut regs = vec![RegisterArray::booleans("flag", n, false)];
            regs.extend(dftosf_registers(n));
            (regs, Box::new(move |i| dftosf(i, nn, lamport1bit(i, nn))))
        }
        ("dftosf", _) => {
            let mut regs = flag_turn();
            regs.extend(dftosf_registers(n));
            (regs, Box::new(move |i| dftosf(i, nn, dekker(i, "rw_safe"))))
        }
        ("dijkstra", _) => (
            vec![
                RegisterArray::booleans("b", n, true),
                RegisterArray::booleans("c", n, true),
                RegisterArray::scalar("k", (0..nn).collect(), 0),
            ],
            Box::new(move |i| dijkstra(i, nn)),
        ),
        ("kessels", _) => (
            vec![RegisterArray::booleans("q", 2, false), RegisterArray::array("r", 2, vec![0, 1], vec![0, 0])],
            Box::new(kessels),
        ),
        ("knuth", _) => (
            vec![
                RegisterArray::array("control", n, vec![0, 1, 2], vec![0; n]),
                RegisterArray::scalar("k", (0..nn).collect(), 0),
            ],
            Box::new(move |i| knuth(i, nn)),
        ),
        ("lamport3bit", _) => (
            vec![
                RegisterArray::booleans("x", n, false),
                RegisterArray::booleans("y", n, false),
                RegisterArray::booleans("z", n, false),
            ],
            Box::new(move |i| lamport3bit(i, nn)),
        ),
        ("aravind_blru", v) => {
            let alt = v == "alt";
            (
                vec![
                    RegisterArray::booleans("flag", n, false),
                    RegisterArray::booleans("stage", n, false),
                    RegisterArray::array("date", n, (0..2 * nn - 1).collect(), (0..nn).collect()),
                ],
                Box::new(move |i| aravind(i, nn, alt)),
            )
        }
        ("szymanski_flag", "int") => (
            vec![RegisterArray::array("flag", n, (0..=4).collect(), vec![0; n])],
            Box::new(move |i| szymanski_flag_int(i, nn)),
        ),
        ("szymanski_flag", v) => {
            let alt = v == "bit_alt";
            (
                vec![
                    RegisterArray::booleans("intent", n, false),
                    RegisterArray::booleans("door_in", n, false),
                    RegisterArray::booleans("door_out", n, false),
                ],
                Box::new(move |i| szymanski_flag_bit(i, nn, alt)),
            )
        }
        ("szymanski_3bit", v) => {
            let alt = v == "alt";
            (
                vec![
                    RegisterArray::booleans("a", n, false),
                    RegisterArray::booleans("w", n, false),
                    RegisterArray::booleans("s", n, false),
                ],
                Box::new(move |i| szymanski_3bit(i, nn, alt)),
            )
        }
        _ => return Err(unknown()),
    };
    let programs = (0..n)
        .map(|t| {
            let (entry, exit) = body(t as Value);
            ThreadProgram { thread: t as ThreadId, entry, exit }
        })
        .collect();
    Ok(AlgorithmSpec { name: name.into(), variant: variant.into(), threads: n, registers, programs })
}

fn flag_turn() -> Vec<RegisterArray> {
    vec![RegisterArray::booleans("flag", 2, false), RegisterArray::scalar("turn", vec![0, 1], 0)]
}

fn flag(i: Value) -> crate::threads::ir::RegRef {
    at("flag", c(i))
}

fn is(e: Expr, v: Expr) -> Expr {
    eq(e, v)
}

fn peterson(i: Value) -> Protocol {
    let j = 1 - i;
    (
        vec![
            write(flag(i), tt()),
            write(sc("turn"), c(i)),
            await_(or(is(rd("flag", c(j)), ff()), is(rs("turn"), c(j)))),
        ],
        vec![write(flag(i), ff())],
    )
}

fn dekker(i: Value, variant: &str) -> Protocol {
    let j = 1 - i;
    let wait = if variant == "rw_safe" {
        await_(or(is(rs("turn"), c(i)), is(rd("flag", c(j)), ff())))
    } else {
        await_(is(rs("turn"), c(i)))
    };
    let entry = vec![
        write(flag(i), tt()),
        while_(
            is(rd("flag", c(j)), tt()),
            vec![if_(is(rs("turn"), c(j)), vec![write(flag(i), ff()), wait, write(flag(i), tt())])],
        ),
    ];
    let give_turn = if variant == "base" {
        write(sc("turn"), c(j))
    } else {
        if_(ne(rs("turn"), c(j)), vec![write(sc("turn"), c(j))])
    };
    (entry, vec![give_turn, write(flag(i), ff())])
}

fn anderson(i: Value) -> Protocol {
    let j = 1 - i;
    let x = if i == 0 { rd("t", c(j)) } else { not(rd("t", c(j))) };
    // Thread 1 swaps the roles of p and q in the branches.
    let (yes, no) = if i == 0 { ("p", "q") } else { ("q", "p") };
    (
        vec![
            write(at("p", c(i)), ff()),
            write(at("q", c(i)), ff()),
            set("x", x),
            write(at("t", c(i)), l("x")),
            if_else(
                is(l("x"), tt()),
                vec![write(at(yes, c(i)), tt()), await_(is(rd("p", c(j)), tt()))],
                vec![write(at(no, c(i)), tt()), await_(is(rd("q", c(j)), tt()))],
            ),
        ],
        vec![write(at("p", c(i)), tt()), write(at("q", c(i)), tt())],
    )
}

fn attiya_welch(i: Value, variant: &str) -> Protocol {
    let j = 1 - i;
    let doorway = vec![
        write(flag(i), ff()),
        await_(or(is(rd("flag", c(j)), ff()), is(rs("turn"), c(j)))),
        write(flag(i), tt()),
    ];
    let entry = match variant {
        "orig" | "orig_alt" => {
            let mut e = vec![label("top")];
            e.extend(doorway);
            e.push(if_else(
                is(rs("turn"), c(i)),
                vec![if_(is(rd("flag", c(j)), tt()), vec![goto("top")])],
                vec![await_(is(rd("flag", c(j)), ff()))],
            ));
            e
        }
        "var" => vec![
            repeat_until(doorway, or(is(rs("turn"), c(j)), is(rd("flag", c(j)), ff()))),
            if_(is(rs("turn"), c(j)), vec![await_(is(rd("flag", c(j)), ff()))]),
        ],
        _ => {
            // turn is read once and the value reused by the following test
            let mut body = doorway;
            body.push(set("tmp", rs("turn")));
            vec![
                repeat_until(body, or(is(l("tmp"), c(j)), is(rd("flag", c(j)), ff()))),
                if_(is(l("tmp"), c(j)), vec![await_(is(rd("flag", c(j)), ff()))]),
            ]
        }
    };
    let take_turn = if variant.ends_with("alt") {
        if_(ne(rs("turn"), c(i)), vec![write(sc("turn"), c(i))])
    } else {
        write(sc("turn"), c(i))
    };
    (entry, vec![take_turn, write(flag(i), ff())])
}

fn burns_lynch(i: Value, n: Value) -> Protocol {
    (
        vec![
            repeat_until(
                vec![
                    write(flag(i), ff()),
                    await_each("j", c(0), c(i - 1), false, is(rd("flag", l("j")), ff())),
                    write(flag(i), tt()),
                ],
                forall("j", c(0), c(i), false, is(rd("flag", l("j")), ff())),
            ),
            await_each("j", c(i + 1), c(n - 1), false, is(rd("flag", l("j")), ff())),
        ],
        vec![write(flag(i), ff())],
    )
}

fn lamport1bit(i: Value, n: Value) -> Protocol {
    (
        vec![
            label("l1_top"),
            write(flag(i), tt()),
            for_up(
                "j",
                c(0),
                c(i - 1),
                vec![if_(
                    is(rd("flag", l("j")), tt()),
                    vec![write(flag(i), ff()), await_(is(rd("flag", l("j")), ff())), goto("l1_top")],
                )],
            ),
            await_each("j", c(i + 1), c(n - 1), false, is(rd("flag", l("j")), ff())),
        ],
        vec![write(flag(i), ff())],
    )
}

fn dftosf_registers(n: usize) -> Vec<RegisterArray> {
    vec![RegisterArray::booleans("sf_flag", n, false), RegisterArray::scalar("sf_turn", (0..n as Value).collect(), 0)]
}

/// Wraps a deadlock-free protocol so that it becomes starvation-free.
fn dftosf(i: Value, n: Value, (inner_entry, inner_exit): Protocol) -> Protocol {
    let mut entry = vec![
        write(at("sf_flag", c(i)), tt()),
        repeat_until(
            vec![set("sf_tmp", rs("sf_turn"))],
            or(is(l("sf_tmp"), c(i)), is(rd("sf_flag", l("sf_tmp")), ff())),
        ),
    ];
    entry.extend(inner_entry);
    let mut exit = vec![
        write(at("sf_flag", c(i)), ff()),
        set("sf_tmp", rs("sf_turn")),
        if_(
            is(rd("sf_flag", l("sf_tmp")), ff()),
            vec![write(sc("sf_turn"), modulo(add(l("sf_tmp"), c(1)), c(n)))],
        ),
    ];
    exit.extend(inner_exit);
    (entry, exit)
}

fn dijkstra(i: Value, n: Value) -> Protocol {
    (
        vec![
            write(at("b", c(i)), ff()),
            label("li1"),
            if_else(
                ne(rs("k"), c(i)),
                vec![
                    write(at("c", c(i)), tt()),
                    // b[k] reads k afresh to pick the register
                    if_(is(rd("b", rs("k")), tt()), vec![write(sc("k"), c(i))]),
                    goto("li1"),
                ],
                vec![
                    write(at("c", c(i)), ff()),
                    for_up(
                        "j",
                        c(0),
                        c(n - 1),
                        vec![if_(and(ne(l("j"), c(i)), is(rd("c", l("j")), ff())), vec![goto("li1")])],
                    ),
                ],
            ),
        ],
        vec![write(at("c", c(i)), tt()), write(at("b", c(i)), tt())],
    )
}

fn kessels(i: Value) -> Protocol {
    let j = 1 - i;
    let parity = || modulo(add(rd("r", c(i)), c(j)), c(2));
    (
        vec![
            write(at("q", c(j)), tt()),
            write(at("r", c(j)), parity()),
            await_(or(is(rd("q", c(i)), ff()), ne(rd("r", c(j)), parity()))),
        ],
        vec![write(at("q", c(j)), ff())],
    )
}

fn knuth(i: Value, n: Value) -> Protocol {
    let scan = |from: Expr| {
        for_down(
            "j",
            from,
            c(0),
            vec![
                if_(is(l("j"), c(i)), vec![goto("l2")]),
                if_(ne(rd("control", l("j")), c(0)), vec![goto("l1")]),
            ],
        )
    };
    let next_k = if i == 0 { n - 1 } else { i - 1 };
    (
        vec![
            label("l0"),
            write(at("control", c(i)), c(1)),
            label("l1"),
            scan(rs("k")),
            scan(c(n - 1)),
            label("l2"),
            write(at("control", c(i)), c(2)),
            for_down(
                "j",
                c(n - 1),
                c(0),
                vec![if_(and(ne(l("j"), c(i)), is(rd("control", l("j")), c(2))), vec![goto("l0")])],
            ),
            write(sc("k"), c(i)),
        ],
        vec![write(sc("k"), c(next_k)), write(at("control", c(i)), c(0))],
    )
}

fn lamport3bit(i: Value, n: Value) -> Protocol {
    let succ = |e: Expr| modulo(add(e, c(1)), c(n));
    (
        vec![
            write(at("y", c(i)), tt()),
            label("l1"),
            write(at("x", c(i)), tt()),
            label("l2"),
            // γ: ids whose y is set, as a bitmask, read in ascending order
            set("gamma", c(0)),
            for_up("j", c(0), c(n - 1), vec![if_(is(rd("y", l("j")), tt()), vec![set("gamma", with_bit(l("gamma"), l("j")))])]),
            // ζ: one snapshot read of z for each member of γ
            set("zeta", c(0)),
            for_up(
                "j",
                c(0),
                c(n - 1),
                vec![if_(
                    is(bit(l("gamma"), l("j")), c(1)),
                    vec![if_(is(rd("z", l("j")), tt()), vec![set("zeta", with_bit(l("zeta"), l("j")))])],
                )],
            ),
            set("f", Expr::CyclicGapMin(Box::new(l("gamma")), Box::new(l("zeta")))),
            set("j", l("f")),
            while_(
                ne(l("j"), c(i)),
                vec![
                    if_(
                        is(rd("y", l("j")), tt()),
                        vec![if_(is(rd("x", c(i)), tt()), vec![write(at("x", c(i)), ff())]), goto("l2")],
                    ),
                    set("j", succ(l("j"))),
                ],
            ),
            if_(is(rd("x", c(i)), ff()), vec![goto("l1")]),
            set("j", c((i + 1) % n)),
            while_(
                ne(l("j"), l("f")),
                vec![if_(is(rd("x", l("j")), tt()), vec![goto("l2")]), set("j", succ(l("j")))],
            ),
        ],
        vec![
            if_else(is(rd("z", c(i)), tt()), vec![write(at("z", c(i)), ff())], vec![write(at("z", c(i)), tt())]),
            write(at("x", c(i)), ff()),
            write(at("y", c(i)), ff()),
        ],
    )
}

fn aravind(i: Value, n: Value, alt: bool) -> Protocol {
    let pass = if alt {
        or(
            is(rd("flag", l("j")), ff()),
            and(lt(rd("date", c(i)), rd("date", l("j"))), is(rd("stage", l("j")), ff())),
        )
    } else {
        or(is(rd("flag", l("j")), ff()), lt(rd("date", c(i)), rd("date", l("j"))))
    };
    let limit = 2 * n - 1;
    (
        vec![
            write(flag(i), tt()),
            repeat_until(
                vec![
                    write(at("stage", c(i)), ff()),
                    await_each("j", c(0), c(n - 1), true, pass),
                    write(at("stage", c(i)), tt()),
                ],
                forall("j", c(0), c(n), true, is(rd("stage", l("j")), ff())),
            ),
        ],
        vec![
            set("m", rd("date", c(0))),
            for_up("j", c(1), c(n - 1), vec![set("m", max(l("m"), rd("date", l("j"))))]),
            set("m", add(l("m"), c(1))),
            // A new date past the domain triggers the reset instead of being
            // stored; a stored date can never reach the limit, so the re-read
            // that follows it always falls through.
            if_else(
                ge(l("m"), c(limit)),
                vec![for_up("j", c(0), c(n - 1), vec![write(at("date", l("j")), l("j"))])],
                vec![
                    write(at("date", c(i)), l("m")),
                    if_(ge(rd("date", c(i)), c(limit)), vec![]),
                ],
            ),
            write(at("stage", c(i)), ff()),
            write(flag(i), ff()),
        ],
    )
}

fn szymanski_flag_int(i: Value, n: Value) -> Protocol {
    let f = || rd("flag", l("j"));
    (
        vec![
            write(flag(i), c(1)),
            await_each("j", c(0), c(n - 1), false, lt(f(), c(3))),
            write(flag(i), c(3)),
            if_(
                exists("j", c(0), c(n), false, is(f(), c(1))),
                vec![write(flag(i), c(2)), await_(exists("j", c(0), c(n), false, is(f(), c(4))))],
            ),
            write(flag(i), c(4)),
            await_each("j", c(0), c(i - 1), false, lt(f(), c(2))),
        ],
        vec![
            await_each("j", c(i + 1), c(n - 1), false, or(lt(f(), c(2)), gt(f(), c(3)))),
            write(flag(i), c(0)),
        ],
    )
}

fn szymanski_flag_bit(i: Value, n: Value, alt: bool) -> Protocol {
    let r = |a: &str| rd(a, l("j"));
    let own = |a: &str, v: Expr| write(at(a, c(i)), v);
    let exit_writes = if alt {
        vec![own("door_out", ff()), own("intent", ff()), own("door_in", ff())]
    } else {
        vec![own("intent", ff()), own("door_in", ff()), own("door_out", ff())]
    };
    let mut exit = vec![await_each(
        "j",
        c(i + 1),
        c(n - 1),
        false,
        or(is(r("door_in"), ff()), is(r("door_out"), tt())),
    )];
    exit.extend(exit_writes);
    (
        vec![
            own("intent", tt()),
            await_each("j", c(0), c(n - 1), false, or(is(r("intent"), ff()), is(r("door_in"), ff()))),
            own("door_in", tt()),
            if_(
                exists("j", c(0), c(n), false, and(is(r("intent"), tt()), is(r("door_in"), ff()))),
                vec![own("intent", ff()), await_(exists("j", c(0), c(n), false, is(r("door_out"), tt())))],
            ),
            if_(is(rd("intent", c(i)), ff()), vec![own("intent", tt())]),
            own("door_out", tt()),
            await_each("j", c(0), c(i - 1), false, is(r("door_in"), ff())),
        ],
        exit,
    )
}

fn szymanski_3bit(i: Value, n: Value, alt: bool) -> Protocol {
    let own = |a: &str, v: Expr| write(at(a, c(i)), v);
    let j = || l("j");
    let bump = || set("j", add(l("j"), c(1)));
    let scan_a = || while_(and(lt(j(), c(n)), is(rd("a", j()), ff())), vec![bump()]);
    let line18 = if alt {
        or(is(rd("s", j()), ff()), is(rd("w", j()), tt()))
    } else {
        or(is(rd("w", j()), tt()), is(rd("s", j()), ff()))
    };
    (
        vec![
            own("a", tt()),
            await_each("j", c(0), c(n - 1), false, is(rd("s", j()), ff())),
            own("w", tt()),
            own("a", ff()),
            while_(
                is(rd("s", c(i)), ff()),
                vec![
                    set("j", c(0)),
                    scan_a(),
                    if_(
                        is(j(), c(n)),
                        vec![
                            own("s", tt()),
                            set("j", c(0)),
                            scan_a(),
                            if_else(
                                lt(j(), c(n)),
                                vec![own("s", ff())],
                                vec![own("w", ff()), await_each("j", c(0), c(n - 1), false, is(rd("w", j()), ff()))],
                            ),
                        ],
                    ),
                    if_(lt(j(), c(n)), vec![set("j", c(0)), while_(and(lt(j(), c(n)), line18), vec![bump()])]),
                    if_(and(ne(j(), c(i)), lt(j(), c(n))), vec![own("s", tt()), own("w", ff())]),
                ],
            ),
            await_each("j", c(0), c(i - 1), false, is(rd("s", j()), ff())),
        ],
        vec![own("s", ff())],
    )
}
