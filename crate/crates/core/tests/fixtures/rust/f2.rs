#[derive(Debug, Clone)]
pub struct Widget {
    label: String,
    size: u32,
}

impl Widget {
    pub fn new(label: impl Into<String>, size: u32) -> Widget {
        Widget {
            label: label.into(),
            size,
        }
    }

    pub fn describe(&self) -> String {
        format!("{} ({})", self.label, self.size)
    }
}
