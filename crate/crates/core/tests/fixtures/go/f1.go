package demo

import "math"

func alpha(x float64) float64 {
	return math.Sqrt(x) + 1.0
}

func beta(x, y int64) int64 {
	total := x + y
	return total * 2
}
