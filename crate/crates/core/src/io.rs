//! Game files: JSON with exact integer fractions.
//!
//! ```text
//! {"players": k,
//!  "questions": [[labels]..], "answers": [[labels]..],
//!  "mu": [{"q": [..], "num": N, "den": D}..],
//!  "predicates": [{"kind": "accept_all"} | {"kind": "base", "accepts": [{"q": [..], "a": [..]}..]}..],
//!  "mix": [{"q": [..], "weights": [{"p": idx, "num": N, "den": D}..]}..]}
//! ```
//!
//! Tuples hold label indices. Without `"mix"` every supported question uses
//! predicate 0. Output is canonical: sorted keys, sorted tuples, reduced
//! fractions.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::game::{Game, Label, Predicate, Tuple};
use crate::scalar::{Rational, Scalar};
use crate::strategy::Strategy;

fn err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| err(at, format!("missing field \"{key}\"")))
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| err(at, "expected an object"))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(at, "expected a list"))
}

fn index(v: &Value, at: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| err(at, "expected a non-negative integer"))
}

fn integer(v: &Value, at: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                return Err(err(at, format!("{text} is not an integer; fractions use num/den")));
            }
            BigInt::from_str(&text).map_err(|e| err(at, e.to_string()))
        }
        _ => Err(err(at, "expected an integer")),
    }
}

fn fraction(obj: &Map<String, Value>, at: &str) -> Result<Rational> {
    let num = integer(field(obj, "num", at)?, &format!("{at}.num"))?;
    let den = integer(field(obj, "den", at)?, &format!("{at}.den"))?;
    if !den.is_positive() {
        return Err(err(format!("{at}.den"), "denominator must be positive"));
    }
    Ok(Rational::new(num, den))
}

fn tuple(v: &Value, at: &str) -> Result<Tuple> {
    let items = array(v, at)?;
    items
        .iter()
        .enumerate()
        .map(|(n, x)| index(x, &format!("{at}[{n}]")))
        .collect::<Result<Vec<_>>>()
        .map(Tuple)
}

fn labels(v: &Value, at: &str) -> Result<Vec<Vec<Label>>> {
    array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, alphabet)| {
            let at = format!("{at}[{i}]");
            array(alphabet, &at)?
                .iter()
                .enumerate()
                .map(|(n, l)| match l {
                    Value::String(s) => Ok(Label::Text(s.clone())),
                    Value::Number(x) => x
                        .as_i64()
                        .map(Label::Int)
                        .ok_or_else(|| err(format!("{at}[{n}]"), "labels are integers or strings")),
                    _ => Err(err(format!("{at}[{n}]"), "labels are integers or strings")),
                })
                .collect()
        })
        .collect()
}

/// Parses and validates a game file.
pub fn parse_game(text: &str) -> Result<Game> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        err(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let root = object(&root, "game")?;
    let players = index(field(root, "players", "game")?, "players")?;
    let questions = labels(field(root, "questions", "game")?, "questions")?;
    let answers = labels(field(root, "answers", "game")?, "answers")?;
    if questions.len() != players || answers.len() != players {
        return Err(Error::ArityMismatch {
            what: "alphabet lists".into(),
            expected: players,
            found: if questions.len() != players { questions.len() } else { answers.len() },
        });
    }

    let mut mu = BTreeMap::new();
    for (n, entry) in array(field(root, "mu", "game")?, "mu")?.iter().enumerate() {
        let at = format!("mu[{n}]");
        let obj = object(entry, &at)?;
        let q = tuple(field(obj, "q", &at)?, &format!("{at}.q"))?;
        let w = fraction(obj, &at)?;
        if mu.insert(q.clone(), w).is_some() {
            return Err(err(at, format!("duplicate question {q}")));
        }
    }

    let mut predicates = Vec::new();
    for (n, entry) in array(field(root, "predicates", "game")?, "predicates")?
        .iter()
        .enumerate()
    {
        let at = format!("predicates[{n}]");
        let obj = object(entry, &at)?;
        match field(obj, "kind", &at)?.as_str() {
            Some("accept_all") => predicates.push(Predicate::AcceptAll),
            Some("base") => {
                let mut pairs = Vec::new();
                let list = array(field(obj, "accepts", &at)?, &format!("{at}.accepts"))?;
                for (m, pair) in list.iter().enumerate() {
                    let at = format!("{at}.accepts[{m}]");
                    let po = object(pair, &at)?;
                    pairs.push((
                        tuple(field(po, "q", &at)?, &format!("{at}.q"))?,
                        tuple(field(po, "a", &at)?, &format!("{at}.a"))?,
                    ));
                }
                predicates.push(Predicate::base(pairs));
            }
            _ => return Err(err(format!("{at}.kind"), "expected \"accept_all\" or \"base\"")),
        }
    }

    let mix = match root.get("mix") {
        None => mu
            .keys()
            .map(|q| (q.clone(), BTreeMap::from([(0, Rational::from_integer(1.into()))])))
            .collect(),
        Some(list) => {
            let mut mix = BTreeMap::new();
            for (n, entry) in array(list, "mix")?.iter().enumerate() {
                let at = format!("mix[{n}]");
                let obj = object(entry, &at)?;
                let q = tuple(field(obj, "q", &at)?, &format!("{at}.q"))?;
                let mut weights = BTreeMap::new();
                let ws = array(field(obj, "weights", &at)?, &format!("{at}.weights"))?;
                for (m, w) in ws.iter().enumerate() {
                    let at = format!("{at}.weights[{m}]");
                    let wo = object(w, &at)?;
                    let p = index(field(wo, "p", &at)?, &format!("{at}.p"))?;
                    if weights.insert(p, fraction(wo, &at)?).is_some() {
                        return Err(err(at, format!("duplicate predicate {p}")));
                    }
                }
                if mix.insert(q.clone(), weights).is_some() {
                    return Err(err(at, format!("duplicate question {q}")));
                }
            }
            mix
        }
    };

    Game::new(questions, answers, mu, predicates, mix)
}

fn big(n: &BigInt) -> Value {
    Value::Number(Number::from_str(&n.to_string()).expect("integers are valid JSON numbers"))
}

/// `{"num": N, "den": D}` for an exact scalar.
pub fn fraction_json<S: Scalar>(value: &S) -> Result<Value> {
    let (num, den) = value.exact_ratio().ok_or(Error::InexactScalar)?;
    let mut m = Map::new();
    m.insert("num".into(), big(&num));
    m.insert("den".into(), big(&den));
    Ok(Value::Object(m))
}

/// `"N/D"`, or `"N"` for integers.
pub fn fraction_text<S: Scalar>(value: &S) -> String {
    crate::game::format_scalar(value)
}

fn tuple_json(t: &Tuple) -> Value {
    Value::from(t.0.clone())
}

fn label_json(l: &Label) -> Value {
    match l {
        Label::Int(v) => Value::from(*v),
        Label::Text(s) => Value::from(s.clone()),
    }
}

fn with_weight(mut m: Map<String, Value>, w: Value) -> Value {
    if let Value::Object(f) = w {
        m.extend(f);
    }
    Value::Object(m)
}

/// The canonical JSON value of a game.
pub fn game_json<S: Scalar>(game: &Game<S>) -> Result<Value> {
    let alphabets = |a: &Vec<Vec<Label>>| -> Value {
        Value::Array(
            a.iter()
                .map(|xs| Value::Array(xs.iter().map(label_json).collect()))
                .collect(),
        )
    };
    let mut root = Map::new();
    root.insert("players".into(), Value::from(game.players()));
    root.insert("questions".into(), alphabets(&game.questions));
    root.insert("answers".into(), alphabets(&game.answers));

    let mut mu = Vec::new();
    for (q, w) in &game.mu {
        let mut m = Map::new();
        m.insert("q".into(), tuple_json(q));
        mu.push(with_weight(m, fraction_json(w)?));
    }
    root.insert("mu".into(), Value::Array(mu));

    let predicates = game
        .predicates
        .iter()
        .map(|p| {
            let mut m = Map::new();
            match p {
                Predicate::AcceptAll => {
                    m.insert("kind".into(), Value::from("accept_all"));
                }
                Predicate::Base { accepts } => {
                    m.insert("kind".into(), Value::from("base"));
                    let pairs = accepts
                        .iter()
                        .flat_map(|(q, set)| {
                            set.iter().map(move |a| {
                                let mut e = Map::new();
                                e.insert("q".into(), tuple_json(q));
                                e.insert("a".into(), tuple_json(a));
                                Value::Object(e)
                            })
                        })
                        .collect();
                    m.insert("accepts".into(), Value::Array(pairs));
                }
            }
            Value::Object(m)
        })
        .collect();
    root.insert("predicates".into(), Value::Array(predicates));

    let mut mix = Vec::new();
    for (q, weights) in &game.mix {
        let mut ws = Vec::new();
        for (p, w) in weights {
            let mut m = Map::new();
            m.insert("p".into(), Value::from(*p));
            ws.push(with_weight(m, fraction_json(w)?));
        }
        let mut m = Map::new();
        m.insert("q".into(), tuple_json(q));
        m.insert("weights".into(), Value::Array(ws));
        mix.push(Value::Object(m));
    }
    root.insert("mix".into(), Value::Array(mix));
    Ok(Value::Object(root))
}

/// Canonical game file text, newline terminated.
pub fn serialize_game<S: Scalar>(game: &Game<S>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&game_json(game)?).expect("values serialize");
    s.push('\n');
    Ok(s)
}

pub fn strategy_json(strategy: &Strategy) -> Value {
    Value::from(strategy.maps().to_vec())
}

/// Set of tuples as a JSON list.
pub fn tuples_json<'a>(tuples: impl IntoIterator<Item = &'a Tuple>) -> Value {
    Value::Array(tuples.into_iter().map(tuple_json).collect())
}

/// Sorted set of labels used by a player, for reports.
pub fn label_set_json(labels: &BTreeSet<usize>) -> Value {
    Value::from(labels.iter().copied().collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn round_trip_bundled_games() {
        for (name, g) in generators::catalog() {
            let text = serialize_game(&g).unwrap();
            let back = parse_game(&text).unwrap();
            assert_eq!(back, g, "{name}");
            assert_eq!(serialize_game(&back).unwrap(), text, "{name}");
        }
    }

    #[test]
    fn floats_are_rejected() {
        let text = r#"{"players":2,"questions":[[0],[0]],"answers":[[0],[0]],
            "mu":[{"q":[0,0],"num":0.5,"den":1}],"predicates":[{"kind":"accept_all"}]}"#;
        match parse_game(text) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "mu[0].num"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_mix_defaults_to_first_predicate() {
        let text = r#"{"players":2,"questions":[[0],[0]],"answers":[[0],[0]],
            "mu":[{"q":[0,0],"num":2,"den":2}],"predicates":[{"kind":"accept_all"}]}"#;
        let g = parse_game(text).unwrap();
        assert_eq!(g, generators::accept_all(2, 1, 1));
        let canonical = serialize_game(&g).unwrap();
        assert!(canonical.contains("\"den\": 1"));
        assert!(canonical.contains("\"mix\""));
    }

    #[test]
    fn huge_integers_survive() {
        let text = r#"{"players":2,"questions":[[0,1],[0]],"answers":[[0],[0]],
            "mu":[{"q":[0,0],"num":1,"den":100000000000000000000000000000},
                  {"q":[1,0],"num":99999999999999999999999999999,"den":100000000000000000000000000000}],
            "predicates":[{"kind":"accept_all"}]}"#;
        let g = parse_game(text).unwrap();
        let again = parse_game(&serialize_game(&g).unwrap()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn validation_errors_pass_through() {
        let text = r#"{"players":2,"questions":[[0],[0]],"answers":[[0],[0]],
            "mu":[{"q":[0,0],"num":9,"den":10}],"predicates":[{"kind":"accept_all"}]}"#;
        assert!(matches!(
            parse_game(text),
            Err(Error::DistributionNotNormalized { .. })
        ));
        assert!(matches!(parse_game("{"), Err(Error::Parse { .. })));
    }
}
