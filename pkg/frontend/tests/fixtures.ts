// Three /meta documents of growing size, shaped exactly like the
// daemon's network view output.

export const EMPTY_NETWORK =
  "<network><services></services><links></links><peers></peers></network>";

export const SMALL_NETWORK = `<network><services><service id="alpha" kind="echo"><meta key="id">alpha</meta><meta key="kind">echo</meta><meta key="role">edge</meta></service><service id="beta" kind="service"><meta key="id">beta</meta><meta key="kind">service</meta><service id="inner" kind="info"><meta key="id">inner</meta><meta key="kind">info</meta></service></service></services><links><link kind="association" from="beta" to="alpha" weight="1.0"/><link kind="dynamic" from="alpha" to="beta/inner" weight="3.0"/><link kind="permanent" from="alpha" to="beta" weight="1.0"/></links><peers><peer url="http://127.0.0.1:9000"/></peers></network>`;

export const LARGE_NETWORK = `<network><services><service id="a" kind="service"><meta key="id">a</meta><meta key="kind">service</meta></service><service id="b" kind="service"><meta key="id">b</meta><meta key="kind">service</meta></service><service id="c" kind="mystery"><meta key="id">c</meta><meta key="kind">mystery</meta></service><service id="hub" kind="service"><meta key="id">hub</meta><meta key="kind">service</meta><service id="mid" kind="service"><meta key="id">mid</meta><meta key="kind">service</meta><service id="leaf" kind="info"><meta key="id">leaf</meta><meta key="kind">info</meta></service></service></service><service id="z" kind="counter"><meta key="id">z</meta><meta key="kind">counter</meta></service></services><links><link kind="dynamic" from="a" to="b" weight="2.43"/><link kind="dynamic" from="b" to="hub/mid/leaf" weight="1.1"/><link kind="permanent" from="hub" to="a" weight="1.0"/><link kind="association" from="c" to="z" weight="1.0"/></links><peers><peer url="http://peer-one:8072"/><peer url="http://peer-two:8072"/></peers></network>`;

// service count includes nested services; edge count is the link count
export const COUNTS = {
  empty: { nodes: 0, edges: 0, peers: 0 },
  small: { nodes: 3, edges: 3, peers: 1 },
  large: { nodes: 7, edges: 4, peers: 2 },
};
