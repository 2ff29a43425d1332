export function alpha(x: number): number {
  return Math.sqrt(x) + 1;
}

export function beta(x: number, y: number): number {
  const total = x + y;
  return total * 2;
}
