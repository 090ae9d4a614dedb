use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Link, NodeId, Position, Topology, TopologyKind};
use crate::error::{Error, Result};

/// On-disk topology: `{ "comm_range": 200.0, "positions": [[x,y],...],
/// "links": [[u,v],...] }`. When `links` is absent they are derived from the
/// positions and the communication range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub comm_range: f64,
    pub positions: Vec<Position>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<Vec<[NodeId; 2]>>,
}

impl TopologyFile {
    pub fn from_topology(topology: &Topology) -> Self {
        TopologyFile {
            comm_range: topology.comm_range(),
            positions: topology.positions().to_vec(),
            links: Some(topology.links().iter().map(|&l| l.into()).collect()),
        }
    }

    pub fn into_topology(self) -> Result<Topology> {
        match self.links {
            None => Topology::from_positions(TopologyKind::Explicit, self.positions, self.comm_range),
            Some(raw) => {
                let mut links = Vec::with_capacity(raw.len());
                for pair in raw {
                    let link = Link::try_from(pair).map_err(Error::InvalidTopology)?;
                    links.push(link);
                }
                let n = links.len();
                let topo = Topology::with_links(self.positions, self.comm_range, links)?;
                if topo.links().len() != n {
                    return Err(Error::InvalidTopology("duplicate links".into()));
                }
                Ok(topo)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Topology> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        let file: TopologyFile = serde_json::from_str(&text)?;
        file.into_topology()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn links_derived_when_absent() {
        let json = r#"{ "comm_range": 200.0, "positions": [[200,600],[400,600],[700,600]] }"#;
        let topo: TopologyFile = serde_json::from_str(json).unwrap();
        let topo = topo.into_topology().unwrap();
        assert_eq!(topo.links().len(), 1);
        assert!(topo.has_link(0, 1));
    }

    #[test]
    fn rejects_bad_links() {
        for json in [
            r#"{ "comm_range": 200.0, "positions": [[0,0],[1,0]], "links": [[0,0]] }"#,
            r#"{ "comm_range": 200.0, "positions": [[0,0],[1,0]], "links": [[0,5]] }"#,
            r#"{ "comm_range": 200.0, "positions": [[0,0],[1,0]], "links": [[0,1],[1,0]] }"#,
            r#"{ "comm_range": -1.0, "positions": [[0,0],[1,0]] }"#,
        ] {
            let file: std::result::Result<TopologyFile, _> = serde_json::from_str(json);
            assert!(
                file.map_err(Error::from).and_then(TopologyFile::into_topology).is_err(),
                "{json}"
            );
        }
    }

    #[test]
    fn round_trip() {
        let topo = Topology::with_links(
            vec![
                Position::new(0.5, 1.25),
                Position::new(3.0, 4.0),
                Position::new(9.0, 9.0),
            ],
            5.0,
            [Link::new(0, 2)],
        )
        .unwrap();
        let text = TopologyFile::from_topology(&topo).to_json().unwrap();
        let back: TopologyFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_topology().unwrap(), topo);
    }
}
