export * from "./csv";
export * from "./charts";
export * from "./svg";
