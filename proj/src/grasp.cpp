namespace jfto {}
