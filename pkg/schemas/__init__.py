# Pydantic models for problem files and results
