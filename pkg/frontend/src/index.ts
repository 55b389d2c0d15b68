export * from "./api.js";
export * from "./model.js";
export * from "./poll.js";
export * from "./npy.js";
export * from "./viewer.js";
export * from "./history.js";
