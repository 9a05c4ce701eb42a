use crate::config::{key, Fallback::*, Key, Kind::*};

pub const SUBCOMMANDS: &[(&str, &str, &[Key])] = &[
    ("chain-basis", "Chain basis of ad_W with replayed residuals", CHAIN),
    ("gr", "Growth-rate invariant of a nilpotent generator", CHAIN),
    ("cq-verify", "Replay the C(q) witness windows for a unipotent flow", CQ),
    ("horo-shear", "Horocycle divergence series and strong-R witness", HORO),
    ("sigma-model", "Crossing witness and axioms for a synthetic time change", SIGMA),
    ("heis-shear", "Shear time, R1' witness and its lift to the special flow", HEIS),
    ("cf", "Certified continued fraction of the rotation number", CF),
    ("witness", "Seeded sweep of R1' witnesses over random base pairs", SWEEP),
];

pub fn schema(name: &str) -> &'static [Key] {
    SUBCOMMANDS.iter().find(|s| s.0 == name).map(|s| s.2).expect("known subcommand")
}

const CHAIN: &[Key] = &[
    key("seed", Int, Value("0"), "RNG seed for random conjugations"),
    key("samples", Int, Value("1"), "generators checked: the base one plus samples-1 random conjugates"),
    key("paper-literal", Bool, Value("false"), "recorded only"),
    key("algebra", Text, Value("sl3"), "sl2, sl3, sl2sl2, sl2-zero or file:<json>"),
];

const CQ: &[Key] = &[
    key("seed", Int, Value("0"), "recorded only"),
    key("samples", Int, Value("1000"), "points per window"),
    key("paper-literal", Bool, Value("false"), "recorded only"),
    key("algebra", Text, Value("sl2sl2"), "sl3, sl2sl2 or file:<json>"),
    key("epsilon", Real, Required, "closeness scale in (0,1)"),
    key("N", Int, Value("100"), "shift-family index"),
    key("L-grid", Int, Value("20"), "number of window starts, log-spaced in [kappa^-2, k]"),
];

const HORO: &[Key] = &[
    key("seed", Int, Value("0"), "recorded only"),
    key("samples", Int, Value("501"), "grid points on [0, t-max]"),
    key("paper-literal", Bool, Value("false"), "recorded only"),
    key("a", Real, Value("0"), "U coordinate"),
    key("b", Real, Value("0"), "X coordinate"),
    key("c", Real, Value("0"), "V coordinate"),
    key("epsilon", Real, Required, "closeness scale in (0,1)"),
    key("t-max", Real, Auto, "series horizon (default: min(shear horizon, 1e4))"),
    key("x", Text, Value("1,0,0,1"), "base point as m11,m12,m21,m22"),
];

const SIGMA: &[Key] = &[
    key("seed", Int, Value("0"), "recorded only"),
    key("samples", Int, Value("200"), "points per window"),
    key("paper-literal", Bool, Value("false"), "recorded only"),
    key("a", Real, Value("0"), "geodesic offset"),
    key("b", Real, Value("0"), "ignored by the witness"),
    key("c", Real, Value("0"), "opposite-horocycle offset"),
    key("epsilon", Real, Required, "closeness scale in (0,1)"),
    key("model", Text, Value("default"), "default or perturbed"),
    key("windows", Int, Value("20"), "window starts"),
    key("axiom-grid", Int, Value("22"), "grid size per axis for the axiom suite"),
];

const HEIS: &[Key] = &[
    key("seed", Int, Value("0"), "recorded only"),
    key("samples", Int, Auto, "points per lifted window (default 1000)"),
    key("paper-literal", Bool, Value("false"), "kappa = eps^10, delta = kappa^10, halved terminal time"),
    key("epsilon", Real, Required, "closeness scale in (0,1)"),
    key("alpha", Text, Value("golden"), "golden, silver, sqrt:<n> or a decimal"),
    key("beta", Real, Value("0"), "skew translation"),
    key("roof", Text, Value("default"), "default, constant:<c> or rows m,n,re,im;..."),
    key("x", Real, Value("0.3"), "base point x"),
    key("y", Real, Value("0.6"), "base point y"),
    key("s", Real, Value("0.4"), "height of both points"),
    key("dx", Real, Value("0"), "x offset of the second point"),
    key("dy", Real, Value("0"), "y offset of the second point"),
    key("kappa", Real, Auto, "window width (default eps^4)"),
    key("delta", Real, Auto, "closeness bound on the pair (default 1e-8)"),
    key("d-factor", Real, Auto, "initial search horizon factor (default 1e3)"),
    key("d-max", Real, Auto, "largest horizon factor (default 1e5)"),
    key("step-budget", Int, Auto, "orbit steps allowed in one search (default 1e8)"),
    key("windows", Int, Auto, "window starts (default 20)"),
    key("halve-m", Bool, Auto, "use the halved terminal time"),
    key("decimation", Int, Value("1000"), "stride of the (n, a_n) series; 0 disables it"),
];

const CF: &[Key] = &[
    key("seed", Int, Value("0"), "recorded only"),
    key("samples", Int, Value("0"), "recorded only"),
    key("paper-literal", Bool, Value("false"), "recorded only"),
    key("alpha", Text, Value("golden"), "golden, silver, sqrt:<n> or a decimal"),
    key("depth", Int, Value("30"), "partial quotients required"),
    key("bound", Int, Value("10"), "bounded-type constant"),
];

const SWEEP: &[Key] = &[
    key("seed", Int, Value("0"), "RNG seed for base points and offsets"),
    key("samples", Int, Auto, "points per window (default 1000)"),
    key("paper-literal", Bool, Value("false"), "kappa = eps^10, delta = kappa^10"),
    key("epsilon", Real, Required, "closeness scale in (0,1)"),
    key("alpha", Text, Value("golden"), "golden, silver, sqrt:<n> or a decimal"),
    key("beta", Real, Value("0"), "skew translation"),
    key("roof", Text, Value("default"), "default, constant:<c> or rows m,n,re,im;..."),
    key("pairs", Int, Value("10"), "random pairs"),
    key("dy-min", Real, Value("1e-3"), "smallest y offset (log-uniform)"),
    key("dy-max", Real, Value("1e-2"), "largest y offset"),
    key("kappa", Real, Auto, "window width (default eps^4)"),
    key("delta", Real, Value("2e-2"), "closeness bound on each pair"),
    key("windows", Int, Auto, "window starts (default 20)"),
];
