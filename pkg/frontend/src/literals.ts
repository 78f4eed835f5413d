// The typed argument literals used on the REST route: i: f: t: s: b64:.
// The form validates before submitting, so a bad literal never leaves
// the browser.

const BASE64 = /^(?:[A-Za-z0-9+/]{4})*(?:[A-Za-z0-9+/]{2}==|[A-Za-z0-9+/]{3}=)?$/;

/** Returns an error message, or null when the literal is well formed. */
export function literalError(text: string): string | null {
  if (text.startsWith("i:")) {
    return /^-?\d+$/.test(text.slice(2)) ? null : "bad integer";
  }
  if (text.startsWith("f:")) {
    const body = text.slice(2);
    return body !== "" && Number.isFinite(Number(body)) ? null : "bad real";
  }
  if (text.startsWith("t:")) {
    const body = text.slice(2);
    return body === "true" || body === "false" ? null : "boolean is t:true or t:false";
  }
  if (text.startsWith("s:")) return null;
  if (text.startsWith("b64:")) {
    return BASE64.test(text.slice(4)) ? null : "bad base64";
  }
  return "missing type prefix (i: f: t: s: b64:)";
}

export function queryString(password: string, literals: string[]): string {
  const parts = literals.map(
    (lit, index) => `arg${index}=${encodeURIComponent(lit)}`,
  );
  if (password !== "") parts.unshift(`password=${encodeURIComponent(password)}`);
  return parts.length ? `?${parts.join("&")}` : "";
}

export function stringLiteral(value: string): string {
  return `s:${value}`;
}
