//! Published bounds on the de Bruijn–Newman constant, as static data.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundRow {
    pub table: u8,
    pub bound: &'static str,
    pub direction: Direction,
    pub attribution: &'static str,
}

const fn row(
    table: u8,
    bound: &'static str,
    direction: Direction,
    attribution: &'static str,
) -> BoundRow {
    BoundRow {
        table,
        bound,
        direction,
        attribution,
    }
}

/// Rows with `table = 1` are lower bounds and `table = 2` upper bounds, each
/// group in chronological order. Values are in the literature parameter `t = −ℵ`.
pub const BOUNDS: [BoundRow; 12] = [
    row(1, "-inf", Direction::Lower, "Newman"),
    row(1, "-50", Direction::Lower, "Csordas–Norfolk–Varga"),
    row(1, "-5", Direction::Lower, "te Riele"),
    row(1, "-0.385", Direction::Lower, "Norfolk–Ruttan–Varga"),
    row(1, "-0.0991", Direction::Lower, "Csordas–Ruttan–Varga"),
    row(1, "-0.000000379", Direction::Lower, "Csordas–Smith–Varga"),
    row(
        1,
        "-0.000000005895",
        Direction::Lower,
        "Csordas–Odlyzko–Smith–Varga",
    ),
    row(1, "-0.00000000263", Direction::Lower, "Odlyzko"),
    row(
        1,
        "-0.0000000000115",
        Direction::Lower,
        "Saouter–Gourdon–Demichel",
    ),
    row(2, "0.5", Direction::Upper, "Ki–Kim–Lee"),
    row(2, "0.22", Direction::Upper, "Polymath"),
    row(2, "inf", Direction::Upper, "Rodgers–Tao"),
];

pub fn to_csv() -> String {
    let mut s = String::from("table,bound,direction,attribution\n");
    for r in BOUNDS {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.table,
            r.bound,
            r.direction.as_str(),
            r.attribution
        ));
    }
    s
}

pub fn to_json() -> String {
    let mut s = serde_json::to_string_pretty(&serde_json::json!({ "bounds": BOUNDS }))
        .expect("static rows serialise");
    s.push('\n');
    s
}
