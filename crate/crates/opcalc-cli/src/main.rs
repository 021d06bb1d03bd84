fn main() { println!("{}", opcalc::placeholder()); }
