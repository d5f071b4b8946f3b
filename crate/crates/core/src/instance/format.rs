use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Geometry, InstanceError, InstanceKind, OnlineInstance};
use crate::metric::{MetricSpace, WeightedTree};
use crate::rational;

/// Wire form of an instance. Rationals travel as `"p/q"` strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: InstanceKind,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<String>>>,
    sites: Vec<usize>,
    capacities: Vec<u32>,
    requests: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// Serializes to the instance JSON format. Tree edges are written as
/// `[parent, child, weight]` in ascending child order.
pub fn to_json(inst: &OnlineInstance) -> String {
    let (edges, dist) = match &inst.geometry {
        Geometry::Tree(t) => (
            Some(t.edges().into_iter().map(|(c, p, w)| (p, c, rational::format(&w))).collect()),
            None,
        ),
        Geometry::Metric(m) => (
            None,
            Some(m.matrix().iter().map(|row| row.iter().map(rational::format).collect()).collect()),
        ),
    };
    let file = InstanceFile {
        kind: inst.kind,
        n: inst.n(),
        edges,
        dist,
        sites: inst.sites.clone(),
        capacities: inst.capacities.clone(),
        requests: inst.requests.clone(),
        seed: inst.seed,
    };
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

/// Parses and validates an instance document. Trees are rooted at vertex 0.
pub fn from_json(text: &str) -> Result<OnlineInstance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let geometry = match (file.edges, file.dist) {
        (Some(edges), None) => {
            let edges = edges
                .iter()
                .map(|(u, v, w)| Ok((*u, *v, rational::parse(w)?)))
                .collect::<Result<Vec<_>, InstanceError>>()?;
            Geometry::Tree(WeightedTree::from_edges(file.n, &edges)?)
        }
        (None, Some(dist)) => {
            let dist = dist
                .iter()
                .map(|row| row.iter().map(|d| rational::parse(d)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Geometry::Metric(MetricSpace::new(dist)?)
        }
        _ => return Err(InstanceError::Geometry),
    };
    if geometry.len() != file.n {
        return Err(InstanceError::PointCount { declared: file.n, actual: geometry.len() });
    }
    let inst = OnlineInstance {
        geometry,
        sites: file.sites,
        capacities: file.capacities,
        requests: file.requests,
        kind: file.kind,
        seed: file.seed,
    };
    inst.validate()?;
    Ok(inst)
}

/// Hex SHA-256 of the compact canonical JSON of an instance.
pub fn digest(inst: &OnlineInstance) -> String {
    let compact: serde_json::Value = serde_json::from_str(&to_json(inst)).expect("round trip");
    let bytes = serde_json::to_vec(&compact).expect("serializable");
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, CapacityScheme, GeneratorConfig, Shape, WeightSpec};
    use proptest::prelude::*;

    const P3: &str = r#"{
  "kind": "OMT_S2",
  "n": 3,
  "edges": [[0, 1, "1"], [1, 2, "2/1"]],
  "sites": [0, 1, 2],
  "capacities": [1, 1, 1],
  "requests": [2, 2, 2]
}"#;

    #[test]
    fn parses_the_p3_document() {
        let inst = from_json(P3).unwrap();
        let tree = inst.geometry.as_tree().unwrap();
        assert_eq!(tree.path_distance(0, 2), crate::Rational::from_integer(3));
        assert_eq!(inst.requests, vec![2, 2, 2]);
        assert!(to_json(&inst).contains("\"2/1\""));
        assert_eq!(from_json(&to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(from_json("{"), Err(InstanceError::Json(_))));
        let both = P3.replace("\"sites\"", "\"dist\": [], \"sites\"");
        assert!(matches!(from_json(&both), Err(InstanceError::Geometry)));
        let bad_w = P3.replace("\"2/1\"", "\"two\"");
        assert!(matches!(from_json(&bad_w), Err(InstanceError::Rational(_))));
        let bad_n = P3.replace("\"n\": 3", "\"n\": 4");
        assert!(from_json(&bad_n).is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = from_json(P3).unwrap();
        let b = a.with_requests(vec![2, 2, 1]).unwrap();
        assert_eq!(digest(&a), digest(&a.clone()));
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    fn config_strategy() -> impl Strategy<Value = GeneratorConfig> {
        (any::<u64>(), 0usize..4, 2usize..6, any::<bool>()).prop_map(|(seed, shape, n, random_caps)| {
            let shape = [Shape::RandomTree, Shape::Path, Shape::Star, Shape::RandomMetric][shape];
            let m = if random_caps { 2.min(n) } else { n };
            GeneratorConfig {
                seed,
                shape,
                n,
                m,
                k: n + 1,
                weights: WeightSpec::Uniform { lo: 0, hi: 3 },
                capacity: if random_caps { CapacityScheme::Random } else { CapacityScheme::Unit },
                requests_on_sites: false,
            }
        })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(cfg in config_strategy()) {
            let cfg = GeneratorConfig { k: if cfg.capacity == CapacityScheme::Unit { cfg.m } else { cfg.k }, ..cfg };
            let inst = generate(&cfg).unwrap();
            let text = to_json(&inst);
            prop_assert_eq!(from_json(&text).unwrap(), inst.clone());
            prop_assert_eq!(to_json(&from_json(&text).unwrap()), text);
        }
    }
}
