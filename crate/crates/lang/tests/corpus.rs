use itree_lang::corpus::ALL;
use itree_lang::load;

#[test]
fn every_example_loads() {
    for (file, src) in ALL {
        if let Err(e) = load(src) {
            panic!("{}", e.render(file, src));
        }
    }
}
