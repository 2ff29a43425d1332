export interface Labeled {
  label: string;
}

export class Widget implements Labeled {
  label: string;
  private size: number;

  constructor(label: string, size = 1) {
    this.label = label;
    this.size = size;
  }

  describe(): string {
    return `${this.label} (${this.size})`;
  }
}
