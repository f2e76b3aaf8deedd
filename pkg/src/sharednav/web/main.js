import { App } from "./app.js";
import { Connection } from "./connection.js";
const root = document.getElementById("app");
if (root === null)
    throw new Error("missing #app container");
const scheme = location.protocol === "https:" ? "wss" : "ws";
const connection = new Connection(`${scheme}://${location.host}/ws`);
new App(root, connection);
connection.start();
