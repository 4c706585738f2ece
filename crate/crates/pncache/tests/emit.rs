use pncache::harness::emit::{col, to_string, Column, Kind};
use pncache::harness::{parse, Format, Table, Value};
use pncache_core::rational::q;
use proptest::prelude::*;

const SCHEMA: &[Column] = &[
    col("i", Kind::Int),
    col("x", Kind::Float),
    col("r", Kind::Frac),
    col("s", Kind::Text),
    col("b", Kind::Bool),
];

fn nullable<T: Into<Value> + std::fmt::Debug>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Value> {
    prop::option::of(s).prop_map(Value::from)
}

fn row() -> impl Strategy<Value = Vec<Value>> {
    (
        nullable(any::<i64>()),
        nullable(prop::num::f64::NORMAL | prop::num::f64::ZERO),
        nullable((-10_000i128..10_000, 1i128..10_000).prop_map(|(n, d)| q(n, d))),
        "[ -~äγ,\"\n]{0,12}".prop_map(Value::Text),
        nullable(any::<bool>()),
    )
        .prop_map(|(a, b, c, d, e)| vec![a, b, c, d, e])
}

proptest! {
    #[test]
    fn tables_round_trip(rows in prop::collection::vec(row(), 0..8), json in any::<bool>()) {
        let mut t = Table::new(SCHEMA);
        for r in rows {
            t.push(r);
        }
        let f = if json { Format::Json } else { Format::Csv };
        let text = to_string(&t, f).unwrap();
        prop_assert_eq!(parse(SCHEMA, f, text.as_bytes()).unwrap(), t);
    }
}
