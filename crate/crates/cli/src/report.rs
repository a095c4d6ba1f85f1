use std::path::Path;

/// Renders CSV text as a table: first column left-aligned, the rest right.
pub fn aligned_table(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().filter(|l| !l.is_empty()).map(|l| l.split(',').collect()).collect();
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..columns).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| if c == 0 { format!("{cell:<w$}", w = widths[c]) } else { format!("{cell:>w$}", w = widths[c]) })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn summary_table(dir: &Path) -> std::io::Result<String> {
    Ok(aligned_table(&std::fs::read_to_string(dir.join("summary.csv"))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_line_up() {
        let t = aligned_table("metric,mean,n\nfinal_x,0.5,1\nlong_metric_name,0.25,10\n");
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "metric            mean   n");
        assert_eq!(lines[1], "final_x            0.5   1");
        assert_eq!(lines[2], "long_metric_name  0.25  10");
    }

    #[test]
    fn empty_input() {
        assert_eq!(aligned_table(""), "");
    }
}
