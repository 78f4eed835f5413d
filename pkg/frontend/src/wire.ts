// Decoding of wire response documents: <response><value>...</value></response>
// on success, <fault><code/><message/></fault> otherwise.

export type WireValue =
  | null
  | boolean
  | number
  | string
  | Uint8Array
  | WireValue[]
  | { [key: string]: WireValue };

export interface DecodedResponse {
  ok: boolean;
  value?: WireValue;
  code?: number;
  message?: string;
}

export class WireError extends Error {}

function decodeValue(el: Element): WireValue {
  const text = () => el.textContent ?? "";
  switch (el.tagName) {
    case "null":
      return null;
    case "bool":
      if (text() === "true") return true;
      if (text() === "false") return false;
      throw new WireError(`bad bool ${text()}`);
    case "int": {
      const n = Number(text());
      if (!Number.isInteger(n)) throw new WireError(`bad int ${text()}`);
      return n;
    }
    case "real": {
      const n = Number(text());
      if (Number.isNaN(n)) throw new WireError(`bad real ${text()}`);
      return n;
    }
    case "str":
      return text();
    case "bin": {
      const raw = atob(text());
      return Uint8Array.from(raw, (c) => c.charCodeAt(0));
    }
    case "list":
      return Array.from(el.children, decodeValue);
    case "map": {
      const out: { [key: string]: WireValue } = {};
      for (const entry of el.children) {
        const key = entry.getAttribute("key");
        if (entry.tagName !== "entry" || key === null || entry.children.length !== 1) {
          throw new WireError("bad map entry");
        }
        out[key] = decodeValue(entry.children[0]);
      }
      return out;
    }
    default:
      throw new WireError(`unknown value tag <${el.tagName}>`);
  }
}

export function decodeResponse(xml: string): DecodedResponse {
  const doc = new DOMParser().parseFromString(xml, "application/xml");
  const root = doc.documentElement;
  if (doc.querySelector("parsererror")) throw new WireError("unparseable response");
  if (root.tagName === "fault") {
    const code = Number(root.querySelector("code")?.textContent ?? "");
    const message = root.querySelector("message")?.textContent ?? "";
    if (!Number.isInteger(code)) throw new WireError("fault without a code");
    return { ok: false, code, message };
  }
  if (root.tagName === "response") {
    const value = root.querySelector(":scope > value");
    if (!value || value.children.length !== 1) {
      throw new WireError("response must hold one value");
    }
    return { ok: true, value: decodeValue(value.children[0]) };
  }
  throw new WireError(`unexpected document <${root.tagName}>`);
}

/** Render a decoded value for the result pane. */
export function showValue(value: WireValue): string {
  if (value === null) return "null";
  if (value instanceof Uint8Array) return `bytes[${value.length}]`;
  if (Array.isArray(value)) return value.map(showValue).join("\n");
  if (typeof value === "object") {
    return Object.entries(value)
      .map(([k, v]) => `${k}=${showValue(v)}`)
      .join("\n");
  }
  return String(value);
}
