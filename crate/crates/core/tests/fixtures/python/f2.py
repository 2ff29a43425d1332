class Widget:
    """A widget with a label and a size."""

    def __init__(self, label, size=1):
        self.label = label
        self.size = size

    def describe(self):
        return f"{self.label} ({self.size})"


DEFAULT = Widget("default")
