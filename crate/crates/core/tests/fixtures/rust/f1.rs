pub fn alpha(x: f64) -> f64 {
    x.sqrt() + 1.0
}

pub fn beta(x: i64, y: i64) -> i64 {
    let total = x + y;
    total * 2
}
