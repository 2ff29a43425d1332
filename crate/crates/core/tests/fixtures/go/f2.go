package demo

import "fmt"

type Widget struct {
	Label string `json:"label"`
	Size  int    `json:"size"`
}

func (w *Widget) Describe() string {
	return fmt.Sprintf("%s (%d)", w.Label, w.Size)
}

func (w *Widget) Grow(by int) {
	w.Size += by
}

func NewWidget(label string) *Widget {
	return &Widget{Label: label, Size: 1}
}
