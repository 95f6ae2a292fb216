fn main() {
    for n in 6..=8 {
        let t = std::time::Instant::now();
        let c = tutte_core::oracle::catalog(n);
        println!("n<={}: {} graphs in {:?}", n, c.len(), t.elapsed());
    }
}
