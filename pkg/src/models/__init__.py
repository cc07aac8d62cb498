# Pydantic models for graphs, gadgets, certificates and reports
