// Console wiring: the polling loop and the four operator panels
// (invocation, factory, configuration, peers), all driven through Client.

import { Client, ServerFault } from "./api.js";
import { literalError } from "./literals.js";
import { NetworkViewModel, parseNetworkView } from "./meta.js";
import { renderNetwork, showError } from "./render.js";
import { showValue } from "./wire.js";

export const DEFAULT_POLL_MS = 2000;

export interface ConsoleHandle {
  /** One poll: fetch the selected /meta, re-render. Deduplicates in flight. */
  tick(): Promise<void>;
  stop(): void;
  model(): NetworkViewModel | null;
  selectPeer(url: string): Promise<void>;
}

const PANEL_HTML = `
  <div class="banner" data-banner hidden></div>
  <div class="toolbar">
    <label>view <select data-peer-select><option value="">this node</option></select></label>
    <label>admin password <input data-admin-password type="password"></label>
  </div>
  <div data-graph class="graph"></div>
  <form data-invoke-form>
    <h3>invoke</h3>
    <input data-service placeholder="service path" required>
    <input data-method placeholder="method" required>
    <input data-password placeholder="password" type="password">
    <textarea data-args placeholder="one literal per line, e.g. i:5"></textarea>
    <button>call</button>
    <pre data-result></pre>
  </form>
  <form data-factory-form>
    <h3>factory</h3>
    <select data-kinds></select>
    <input data-new-id placeholder="service id" required>
    <button>instantiate</button>
  </form>
  <div data-config-panel>
    <h3>configuration</h3>
    <button data-save>save</button>
    <button data-load>load</button>
    <textarea data-config-doc placeholder="saved document"></textarea>
  </div>
  <form data-peer-form>
    <h3>peers</h3>
    <input data-peer-url placeholder="http://host:port" required>
    <button>register</button>
    <ul data-peer-list></ul>
  </form>
`;

export function initConsole(
  root: HTMLElement,
  client: Client,
  pollMs: number = DEFAULT_POLL_MS,
): ConsoleHandle {
  root.innerHTML = PANEL_HTML;
  const q = <T extends HTMLElement>(sel: string) => root.querySelector(sel) as T;
  const banner = q<HTMLElement>("[data-banner]");
  const graph = q<HTMLElement>("[data-graph]");
  const adminPassword = () => q<HTMLInputElement>("[data-admin-password]").value;

  let current: NetworkViewModel | null = null;
  let selectedPeer = "";
  let inFlight: Promise<void> | null = null;
  let timer: ReturnType<typeof setInterval> | null = null;

  const report = (err: unknown) => {
    showError(banner, err instanceof Error ? err.message : String(err));
  };

  function tick(): Promise<void> {
    // a poll landing while one is in flight joins it instead of stacking
    if (inFlight) return inFlight;
    inFlight = (async () => {
      try {
        const xml = selectedPeer
          ? await client.peerMeta(selectedPeer, adminPassword())
          : await client.fetchMeta();
        if (selectedPeer && xml === "") {
          throw new Error("peer has no cached view yet; refresh it");
        }
        current = parseNetworkView(xml);
        renderNetwork(graph, current);
        refreshPeerWidgets(current.peers);
        showError(banner, "");
      } catch (err) {
        report(err); // previous view stays on screen
      } finally {
        inFlight = null;
      }
    })();
    return inFlight;
  }

  function refreshPeerWidgets(peers: string[]): void {
    const select = q<HTMLSelectElement>("[data-peer-select]");
    const known = new Set(
      Array.from(select.options).map((option) => option.value),
    );
    for (const url of peers) {
      if (!known.has(url)) {
        const option = document.createElement("option");
        option.value = option.textContent = url;
        select.appendChild(option);
      }
    }
    const list = q<HTMLUListElement>("[data-peer-list]");
    list.replaceChildren(
      ...peers.map((url) => {
        const item = document.createElement("li");
        item.textContent = url;
        const refresh = document.createElement("button");
        refresh.textContent = "refresh";
        refresh.type = "button";
        refresh.addEventListener("click", () => {
          client.refreshPeer(url, adminPassword()).catch(report);
        });
        item.appendChild(refresh);
        return item;
      }),
    );
  }

  q<HTMLSelectElement>("[data-peer-select]").addEventListener("change", (ev) => {
    selectedPeer = (ev.target as HTMLSelectElement).value;
    void tick();
  });

  q<HTMLFormElement>("[data-invoke-form]").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const result = q<HTMLPreElement>("[data-result]");
    const literals = q<HTMLTextAreaElement>("[data-args]")
      .value.split("\n")
      .filter((line) => line !== "");
    for (const lit of literals) {
      const problem = literalError(lit);
      if (problem) {
        result.textContent = `argument ${JSON.stringify(lit)}: ${problem}`;
        return; // blocked client-side, nothing sent
      }
    }
    client
      .invoke(
        q<HTMLInputElement>("[data-service]").value,
        q<HTMLInputElement>("[data-method]").value,
        q<HTMLInputElement>("[data-password]").value,
        literals,
      )
      .then((decoded) => {
        result.textContent = decoded.ok
          ? showValue(decoded.value ?? null)
          : `fault ${decoded.code}: ${decoded.message}`;
      })
      .catch((err) => {
        result.textContent = `request failed: ${err}`;
      });
  });

  q<HTMLFormElement>("[data-factory-form]").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const kind = q<HTMLSelectElement>("[data-kinds]").value;
    const id = q<HTMLInputElement>("[data-new-id]").value;
    const declaration = `<service id="${id}" kind="${kind}"/>`;
    client.instantiateService(declaration, adminPassword()).then(
      () => tick(),
      report,
    );
  });

  q<HTMLButtonElement>("[data-save]").addEventListener("click", () => {
    client.saveConfig(adminPassword()).then((doc) => {
      q<HTMLTextAreaElement>("[data-config-doc]").value = String(doc);
    }, report);
  });

  q<HTMLButtonElement>("[data-load]").addEventListener("click", () => {
    const doc = q<HTMLTextAreaElement>("[data-config-doc]").value;
    client.loadConfig(doc, adminPassword()).then(() => tick(), report);
  });

  q<HTMLFormElement>("[data-peer-form]").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const url = q<HTMLInputElement>("[data-peer-url]").value;
    client.registerPeer(url, adminPassword()).then(() => tick(), report);
  });

  client
    .listKinds(adminPassword())
    .then((kinds) => {
      const select = q<HTMLSelectElement>("[data-kinds]");
      for (const kind of Array.isArray(kinds) ? kinds : []) {
        const option = document.createElement("option");
        option.value = option.textContent = String(kind);
        select.appendChild(option);
      }
    })
    .catch(report);

  if (pollMs > 0) {
    timer = setInterval(() => void tick(), pollMs);
  }
  void tick();

  return {
    tick,
    stop: () => {
      if (timer !== null) clearInterval(timer);
    },
    model: () => current,
    selectPeer: (url: string) => {
      selectedPeer = url;
      return tick();
    },
  };
}

export { Client, ServerFault };
