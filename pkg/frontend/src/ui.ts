// DOM construction. Text always goes through textContent, never innerHTML.

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function button(label: string, onClick: () => void, cls = "btn"): HTMLButtonElement {
  const node = el("button", { class: cls }, label);
  node.addEventListener("click", onClick);
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

export function option(value: string, label: string): HTMLOptionElement {
  return el("option", { value }, label);
}

export function flash(node: HTMLElement, message: string, kind: "ok" | "err"): void {
  node.textContent = message;
  node.className = `flash ${kind}`;
  node.style.opacity = "1";
  setTimeout(() => {
    node.style.opacity = "0";
  }, 4000);
}
