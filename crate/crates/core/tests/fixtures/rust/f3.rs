use std::collections::BTreeMap;

const GREETING: &str = r#"hello "quoted" world"#;

pub trait Store {
    fn get(&self, key: &str) -> Option<&str>;
}

pub struct MemStore<'a> {
    items: BTreeMap<&'a str, &'a str>,
}

impl<'a> Store for MemStore<'a> {
    fn get(&self, key: &str) -> Option<&str> {
        self.items.get(key).copied()
    }
}

pub fn describe<'a>(store: &'a dyn Store, key: &str) -> String {
    match store.get(key) {
        Some(value) => format!("{GREETING}: {value}"),
        None => 'fallback: {
            break 'fallback String::from("missing");
        },
    }
}
