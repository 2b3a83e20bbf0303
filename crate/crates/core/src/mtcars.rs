//! The `mtcars` data (1974 Motor Trend road tests, 32 cars × 11 variables)
//! as shipped with R's `datasets` package.

use nalgebra::DMatrix;

use crate::dataset::CompleteDataset;
use crate::io::range_transform;

const MTCARS_CSV: &str = include_str!("../data/mtcars.csv");

pub const COLUMNS: [&str; 11] = [
    "mpg", "cyl", "disp", "hp", "drat", "wt", "qsec", "vs", "am", "gear", "carb",
];

fn parse() -> (Vec<String>, DMatrix<f64>) {
    let mut rdr = csv::Reader::from_reader(MTCARS_CSV.as_bytes());
    let mut cars = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.expect("bundled csv is valid");
        cars.push(rec[0].to_string());
        rows.push(
            rec.iter()
                .skip(1)
                .map(|v| v.parse::<f64>().expect("bundled csv is numeric"))
                .collect::<Vec<_>>(),
        );
    }
    let values = DMatrix::from_fn(rows.len(), COLUMNS.len(), |i, j| rows[i][j]);
    (cars, values)
}

/// Car names in the original row order.
pub fn car_names() -> Vec<String> {
    parse().0
}

/// The raw 32 × 11 data.
pub fn mtcars() -> CompleteDataset {
    let names = COLUMNS.iter().map(|s| s.to_string()).collect();
    CompleteDataset::new(names, parse().1).expect("bundled data is finite")
}

/// Every column range-transformed to `[0, 1]`, rows sorted by increasing
/// `mpg` (ties kept in original order).
pub fn mtcars01() -> CompleteDataset {
    range_transform(&mtcars(), Some(0)).expect("no constant columns")
}

/// Look up a bundled dataset by name.
pub fn builtin(name: &str) -> Option<CompleteDataset> {
    match name {
        "mtcars" => Some(mtcars()),
        "mtcars01" => Some(mtcars01()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_ranges() {
        let y = mtcars();
        let ranges = [
            (10.4, 33.9),
            (4.0, 8.0),
            (71.1, 472.0),
            (52.0, 335.0),
            (2.76, 4.93),
            (1.513, 5.424),
            (14.5, 22.9),
            (0.0, 1.0),
            (0.0, 1.0),
            (3.0, 5.0),
            (1.0, 8.0),
        ];
        assert_eq!((y.nrows(), y.ncols()), (32, 11));
        for (j, (lo, hi)) in ranges.iter().enumerate() {
            let c = y.values().column(j);
            assert_eq!((c.min(), c.max()), (*lo, *hi), "{}", COLUMNS[j]);
        }
        let mut cyl: Vec<f64> = y.values().column(1).iter().copied().collect();
        cyl.sort_by(f64::total_cmp);
        cyl.dedup();
        assert_eq!(cyl, vec![4.0, 6.0, 8.0]);
    }

    #[test]
    fn column_means() {
        // reference means of the R dataset
        let means = [20.090625, 6.1875, 230.721875, 146.6875, 3.5965625, 3.21725, 17.84875, 0.4375, 0.40625, 3.6875, 2.8125];
        let y = mtcars();
        for (j, m) in means.iter().enumerate() {
            assert!((y.column_mean(j) - m).abs() < 1e-9, "{}", COLUMNS[j]);
        }
    }

    #[test]
    fn mtcars01_is_sorted_unit_data() {
        let y = mtcars01();
        assert_eq!(y.get(0, 0), 0.0);
        assert_eq!(y.get(31, 0), 1.0);
        assert!((0..31).all(|i| y.get(i, 0) <= y.get(i + 1, 0)));
        assert!(y.values().iter().all(|v| (0.0..=1.0).contains(v)));
        // Cadillac Fleetwood precedes Lincoln Continental (equal mpg)
        let raw = mtcars();
        assert_eq!(y.get(0, 2), (raw.get(14, 2) - 71.1) / (472.0 - 71.1));
    }
}
