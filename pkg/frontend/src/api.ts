// The console's whole server surface: /meta plus REST GETs on /service.
// Management goes through the hosted "admin" service like any other call.

import { queryString, stringLiteral } from "./literals.js";
import { decodeResponse, DecodedResponse, WireValue } from "./wire.js";

export class ServerFault extends Error {
  constructor(
    public code: number,
    message: string,
  ) {
    super(`fault ${code}: ${message}`);
  }
}

export class Client {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  async fetchMeta(): Promise<string> {
    const resp = await this.fetchFn(`${this.baseUrl}/meta`);
    if (!resp.ok) throw new Error(`/meta returned ${resp.status}`);
    return resp.text();
  }

  /** One REST GET; literals must already carry their type prefixes. */
  async invoke(
    servicePath: string,
    method: string,
    password: string,
    literals: string[],
  ): Promise<DecodedResponse> {
    const path = servicePath
      .split("/")
      .map(encodeURIComponent)
      .join("/");
    const url = `${this.baseUrl}/service/${path}/${encodeURIComponent(method)}${queryString(password, literals)}`;
    const resp = await this.fetchFn(url);
    return decodeResponse(await resp.text());
  }

  private async admin(
    method: string,
    password: string,
    literals: string[] = [],
  ): Promise<WireValue> {
    const decoded = await this.invoke("admin", method, password, literals);
    if (!decoded.ok) {
      throw new ServerFault(decoded.code ?? 0, decoded.message ?? "");
    }
    return decoded.value ?? null;
  }

  listKinds(password: string): Promise<WireValue> {
    return this.admin("listKinds", password);
  }

  instantiateService(declarationXml: string, password: string): Promise<WireValue> {
    return this.admin("instantiateService", password, [stringLiteral(declarationXml)]);
  }

  saveConfig(password: string): Promise<WireValue> {
    return this.admin("saveConfig", password);
  }

  loadConfig(doc: string, password: string): Promise<WireValue> {
    return this.admin("loadConfig", password, [stringLiteral(doc)]);
  }

  listPeers(password: string): Promise<WireValue> {
    return this.admin("listPeers", password);
  }

  registerPeer(url: string, password: string): Promise<WireValue> {
    return this.admin("registerPeer", password, [stringLiteral(url)]);
  }

  refreshPeer(url: string, password: string): Promise<WireValue> {
    return this.admin("refreshPeer", password, [stringLiteral(url)]);
  }

  /** The locally cached /meta of a registered peer ("" until refreshed). */
  async peerMeta(url: string, password: string): Promise<string> {
    return String(await this.admin("peerMeta", password, [stringLiteral(url)]));
  }
}
