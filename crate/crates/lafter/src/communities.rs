use std::fmt::Write as _;

use lafter_core::BinaryMatrix;

use crate::error::{Error, Result};

/// Members of each feature column, smallest community first. A node that
/// carries several features is listed under every one of them.
pub fn communities(z: &BinaryMatrix) -> Vec<(usize, Vec<usize>)> {
    let mut groups: Vec<(usize, Vec<usize>)> = (0..z.cols())
        .map(|k| (k, (0..z.rows()).filter(|&i| z.get(i, k) == 1).collect()))
        .collect();
    // Stable sort keeps feature order among equal sizes.
    groups.sort_by_key(|(_, members)| members.len());
    groups
}

/// Plain-text community report; `labels`, when given, name the nodes.
pub fn dump_communities(z: &BinaryMatrix, labels: Option<&[String]>) -> Result<String> {
    if let Some(labels) = labels {
        if labels.len() != z.rows() {
            return Err(Error::Usage(format!(
                "{} labels for a model with {} nodes",
                labels.len(),
                z.rows()
            )));
        }
    }
    let mut out = String::new();
    if z.cols() == 0 {
        out.push_str("# no communities: the model has no active features (K+ = 0)\n");
        return Ok(out);
    }
    for (k, members) in communities(z) {
        let names: Vec<String> = members
            .iter()
            .map(|&i| labels.map_or_else(|| i.to_string(), |l| l[i].clone()))
            .collect();
        writeln!(out, "community {k} ({} members): {}", members.len(), names.join(", ")).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_singletons() {
        let z = BinaryMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], 3).unwrap();
        let groups = communities(&z);
        assert_eq!(groups, vec![(0, vec![0]), (1, vec![1]), (2, vec![2])]);
    }

    #[test]
    fn overlapping_node_is_listed_twice() {
        let z = BinaryMatrix::from_rows(&[vec![1, 1], vec![1, 0], vec![1, 0], vec![0, 1]], 2).unwrap();
        let report = dump_communities(&z, None).unwrap();
        assert_eq!(report, "community 1 (2 members): 0, 3\ncommunity 0 (3 members): 0, 1, 2\n");
    }

    #[test]
    fn labels_and_empty_models() {
        let z = BinaryMatrix::from_rows(&[vec![1], vec![0]], 1).unwrap();
        let labels = vec!["ann".to_string(), "bo".to_string()];
        assert_eq!(dump_communities(&z, Some(&labels)).unwrap(), "community 0 (1 members): ann\n");
        assert!(dump_communities(&z, Some(&labels[..1])).is_err());

        let empty = BinaryMatrix::zeros(3, 0);
        let report = dump_communities(&empty, None).unwrap();
        assert_eq!(report.lines().count(), 1);
        assert!(report.contains("K+ = 0"));
    }
}
